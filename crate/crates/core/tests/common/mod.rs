#![allow(dead_code)]

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use implicitus::ingest::{parse_facts, ParsedFacts};
use implicitus::{Config, Corpus, LabeledCorpus};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn facts(name: &str) -> ParsedFacts {
    let path = fixture(name);
    let file = File::open(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_facts(BufReader::new(file)).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn facts_from_str(text: &str) -> ParsedFacts {
    parse_facts(text.as_bytes()).expect("valid facts")
}

/// Builds a strict corpus from the standard library slice plus `names`.
pub fn corpus_with_stdlib(names: &[&str]) -> Corpus {
    let mut fragments = vec![facts("stdlib.jsonl")];
    fragments.extend(names.iter().map(|n| facts(n)));
    Corpus::build(fragments, true).expect("corpus builds")
}

pub fn labeled(names: &[&str]) -> LabeledCorpus {
    LabeledCorpus::classify(corpus_with_stdlib(names), Config::default()).expect("classifies")
}

pub const DESK: [&str; 4] = [
    "desk/alpha.jsonl",
    "desk/beta.jsonl",
    "desk/gamma.jsonl",
    "desk/delta.jsonl",
];
