use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use implicitus::dedup::retain_project;
use implicitus::ingest::{parse_facts, ParsedFacts};
use implicitus::{metrics, report, Config, Corpus, Error, LabeledCorpus};
use log::LevelFilter;
use rayon::prelude::*;

/// Classify and measure implicits recorded in semantic fact files.
#[derive(Debug, Parser)]
#[command(name = "implicitus", version)]
struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Abort on unresolvable symbols or invalid records instead of skipping them.
    #[arg(long, global = true)]
    strict: bool,

    #[arg(long, global = true, default_value = "warn", value_name = "LEVEL")]
    log_level: LevelFilter,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and link fact files into a corpus snapshot.
    Ingest {
        #[arg(required = true)]
        facts: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print one retention verdict per project in a manifest.
    Dedup {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Label idioms in a corpus snapshot.
    Classify {
        corpus: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Write the corpus summary as JSON.
    Stats {
        labeled: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write CSV datasets and plot data.
    Report {
        labeled: PathBuf,
        #[arg(long)]
        csv_dir: PathBuf,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        top: u64,
    },
}

/// Failure with the process exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_inconsistency() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn input_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn read_facts(path: &Path) -> Result<ParsedFacts, Error> {
    let file = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    parse_facts(BufReader::new(file)).map_err(|error| Error::Parse {
        source_name: path.display().to_string(),
        error,
    })
}

fn ingest(facts: &[PathBuf], output: &Path, strict: bool) -> Result<(), Failure> {
    let fragments = facts.par_iter().map(|p| read_facts(p)).collect::<Result<Vec<_>, _>>()?;
    for (path, f) in facts.iter().zip(&fragments) {
        let c = f.counts();
        log::info!(
            "{}: {} projects, {} modules, {} declarations, {} call sites, {} synthetic trees",
            path.display(),
            c.projects,
            c.modules,
            c.declarations,
            c.callsites,
            c.synthetics
        );
    }
    let corpus = Corpus::build(fragments, strict)?;
    for (m, reason) in &corpus.flagged {
        log::warn!("skipped synthetic trees of module {m}: {reason}");
    }
    corpus.save(output)?;
    Ok(())
}

fn dedup(manifest: &Path, strict: bool) -> Result<(), Failure> {
    let facts = read_facts(manifest)?;
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let write_err = |e: io::Error| input_failure(format!("writing verdicts: {e}"));
    for p in &facts.projects {
        match retain_project(p) {
            Ok(v) => {
                serde_json::to_writer(&mut out, &v).map_err(|e| input_failure(e.to_string()))?;
                out.write_all(b"\n").map_err(write_err)?;
            }
            Err(e) if strict => return Err(Error::from(e).into()),
            Err(e) => log::warn!("skipped: {e}"),
        }
    }
    out.flush().map_err(write_err)
}

fn classify(corpus: &Path, output: &Path, config: Option<&Path>, strict: bool) -> Result<(), Failure> {
    let config = match config {
        Some(p) => Config::load(p).map_err(Error::from)?,
        None => Config::default(),
    };
    let labeled = LabeledCorpus::classify(Corpus::load(corpus)?, config)?;
    let unresolved = &labeled.classification.unresolved_callees;
    if !unresolved.is_empty() {
        let message = format!(
            "{} call sites have unresolved callees, first {}",
            unresolved.len(),
            unresolved[0]
        );
        if strict {
            return Err(Failure { code: 2, message });
        }
        log::warn!("{message}");
    }
    log::info!(
        "{} of {} modules analyzed, {} declarations labeled",
        labeled.analyzed.len(),
        labeled.corpus.modules.len(),
        labeled.classification.decl_idioms.len()
    );
    labeled.save(output)?;
    Ok(())
}

fn stats(labeled: &Path, output: &Path) -> Result<(), Failure> {
    let labeled = LabeledCorpus::load(labeled)?;
    let summary = metrics::summarize(&labeled).map_err(Error::from)?;
    report::write_json(&summary, output)?;
    Ok(())
}

fn run_report(labeled: &Path, csv_dir: &Path, top: u64) -> Result<(), Failure> {
    let labeled = LabeledCorpus::load(labeled)?;
    let top = usize::try_from(top).unwrap_or(usize::MAX);
    for p in report::write_report(&labeled, csv_dir, top)? {
        log::info!("wrote {}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| input_failure(format!("--jobs {n}: {e}")))?;
    }
    match &cli.command {
        Command::Ingest { facts, output } => ingest(facts, output, cli.strict),
        Command::Dedup { manifest } => dedup(manifest, cli.strict),
        Command::Classify { corpus, output, config } => classify(corpus, output, config.as_deref(), cli.strict),
        Command::Stats { labeled, output } => stats(labeled, output),
        Command::Report { labeled, csv_dir, top } => run_report(labeled, csv_dir, *top),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    env_logger::Builder::new()
        .filter_level(cli.log_level)
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("implicitus: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
