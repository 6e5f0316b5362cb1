//! Scores the classifier against the hand-labeled idiom corpus.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use implicitus::classify::Idiom;
use implicitus::ingest::parse_facts;
use implicitus::{Config, Corpus, LabeledCorpus};
use serde::Deserialize;

#[derive(Deserialize)]
struct Labels {
    declarations: BTreeMap<String, Vec<String>>,
    callsites: Vec<SiteLabel>,
}

#[derive(Deserialize)]
struct SiteLabel {
    module: String,
    callee: String,
    line: u32,
    idiom: String,
}

/// A labeled fact: the subject and one idiom it carries.
type Fact = (String, String);

#[derive(Debug)]
pub struct Score {
    pub true_positives: usize,
    pub false_positives: Vec<Fact>,
    pub false_negatives: Vec<Fact>,
    /// Subjects present on one side only, regardless of idioms.
    pub unmatched_subjects: Vec<String>,
    pub modules: usize,
    pub idioms_covered: BTreeSet<String>,
}

impl Score {
    pub fn precision(&self) -> f64 {
        let predicted = self.true_positives + self.false_positives.len();
        if predicted == 0 {
            1.0
        } else {
            self.true_positives as f64 / predicted as f64
        }
    }

    pub fn recall(&self) -> f64 {
        let expected = self.true_positives + self.false_negatives.len();
        if expected == 0 {
            1.0
        } else {
            self.true_positives as f64 / expected as f64
        }
    }

    pub fn perfect(&self) -> bool {
        self.false_positives.is_empty() && self.false_negatives.is_empty() && self.unmatched_subjects.is_empty()
    }
}

fn read_facts(path: &Path) -> implicitus::ingest::ParsedFacts {
    parse_facts(BufReader::new(File::open(path).expect("fixture exists"))).expect("fixture parses")
}

pub fn classify_golden(fixtures: &Path) -> LabeledCorpus {
    let fragments = vec![
        read_facts(&fixtures.join("stdlib.jsonl")),
        read_facts(&fixtures.join("golden/idioms.jsonl")),
    ];
    let corpus = Corpus::build(fragments, true).expect("golden corpus builds");
    LabeledCorpus::classify(corpus, Config::default()).expect("golden corpus classifies")
}

pub fn score(fixtures: &Path) -> Score {
    let labeled = classify_golden(fixtures);
    let labels: Labels =
        serde_json::from_reader(File::open(fixtures.join("golden/labels.json")).expect("labels exist"))
            .expect("labels parse");

    let mut expected_subjects = BTreeSet::new();
    let mut expected = BTreeSet::new();
    for (id, idioms) in &labels.declarations {
        expected_subjects.insert(id.clone());
        for i in idioms {
            expected.insert((id.clone(), i.clone()));
        }
    }
    for s in &labels.callsites {
        let key = format!("{}@{}:{}", s.callee, s.module, s.line);
        expected_subjects.insert(key.clone());
        expected.insert((key, s.idiom.clone()));
    }

    let mut predicted_subjects = BTreeSet::new();
    let mut predicted = BTreeSet::new();
    for (id, idioms) in &labeled.classification.decl_idioms {
        predicted_subjects.insert(id.to_string());
        for i in idioms {
            predicted.insert((id.to_string(), i.to_string()));
        }
    }
    for (cs, idiom) in labeled.labeled_callsites() {
        let key = format!("{}@{}:{}", cs.callee, cs.module, cs.location.range.start_line);
        predicted_subjects.insert(key.clone());
        predicted.insert((key, idiom.to_string()));
    }

    let idioms_covered = expected.iter().map(|(_, i)| i.clone()).collect();
    Score {
        true_positives: expected.intersection(&predicted).count(),
        false_positives: predicted.difference(&expected).cloned().collect(),
        false_negatives: expected.difference(&predicted).cloned().collect(),
        unmatched_subjects: expected_subjects
            .symmetric_difference(&predicted_subjects)
            .cloned()
            .collect(),
        modules: labeled.analyzed.len(),
        idioms_covered,
    }
}

pub fn all_idioms() -> BTreeSet<String> {
    [
        Idiom::LateTrait,
        Idiom::ExtensionMethod,
        Idiom::TypeClass,
        Idiom::ExtensionSyntax,
        Idiom::TypeProof,
        Idiom::Context,
        Idiom::UnrelatedConversion,
        Idiom::BidirectionalConversion,
    ]
    .iter()
    .map(|i| i.to_string())
    .collect()
}
