//! The linked corpus and its classified form, both storable as binary snapshots.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::classify::{classify_corpus, Classification};
use crate::config::Config;
use crate::dedup::{canonical_modules, retain_project, RetentionVerdict};
use crate::error::{Error, Result};
use crate::extract::callsites_from_synthetics;
use crate::ingest::{link_symbols, merge_metadata, normalize_implicit_classes, LinkError, ParsedFacts, Synthetic};
use crate::model::{CallSite, ModuleId, ModuleMeta, ProjectId, ProjectMeta, SymbolTable};

const CORPUS_MAGIC: &[u8; 8] = b"IMPLCORP";
const LABELED_MAGIC: &[u8; 8] = b"IMPLLABL";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("not a {expected} snapshot")]
    BadMagic { expected: &'static str },
    #[error("snapshot format version {found} is not supported (expected {SNAPSHOT_VERSION})")]
    Version { found: u32 },
    #[error("snapshot encoding: {0}")]
    Codec(#[from] bincode::Error),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub projects: BTreeMap<ProjectId, ProjectMeta>,
    pub modules: BTreeMap<ModuleId, ModuleMeta>,
    pub table: SymbolTable,
    /// Implicit call sites, sorted, without exact duplicates.
    pub callsites: Vec<CallSite>,
    /// Modules whose facts reference unknown symbols, with the reason.
    pub flagged: BTreeMap<ModuleId, String>,
}

impl Corpus {
    /// Links parsed fragments and extracts their implicit call sites.
    ///
    /// A module whose synthetic trees cannot be resolved is flagged and its
    /// trees are skipped; with `strict` the first such module aborts the build.
    pub fn build(mut fragments: Vec<ParsedFacts>, strict: bool) -> Result<Corpus> {
        for f in &mut fragments {
            normalize_implicit_classes(f)?;
        }
        let mut table = link_symbols(&fragments)?;
        let (projects, modules) = merge_metadata(&fragments)?;

        let mut callsites: Vec<CallSite> = Vec::new();
        for cs in fragments.iter().flat_map(|f| &f.callsites) {
            if !modules.contains_key(&cs.module) {
                return Err(LinkError::UnknownRecordModule {
                    what: format!("call site of {} in {}", cs.callee, cs.location.path),
                    module: cs.module.clone(),
                }
                .into());
            }
            if cs.is_implicit() {
                callsites.push(cs.clone());
            }
        }

        let mut by_module: BTreeMap<&ModuleId, Vec<Synthetic>> = BTreeMap::new();
        for s in fragments.iter().flat_map(|f| &f.synthetics) {
            if !modules.contains_key(&s.module) {
                return Err(LinkError::UnknownRecordModule {
                    what: format!("synthetic tree in {}", s.path),
                    module: s.module.clone(),
                }
                .into());
            }
            by_module.entry(&s.module).or_default().push(s.clone());
        }
        let extracted: Vec<_> = by_module
            .par_iter()
            .map(|(m, trees)| ((*m).clone(), callsites_from_synthetics(trees, &table)))
            .collect();

        let mut flagged = BTreeMap::new();
        for (module, result) in extracted {
            match result {
                Ok(sites) => callsites.extend(sites),
                Err(error) if strict => {
                    return Err(Error::Synthetic {
                        module: module.to_string(),
                        error,
                    })
                }
                Err(error) => {
                    log::warn!("module {module} flagged: {error}");
                    flagged.insert(module, error.to_string());
                }
            }
        }

        for cs in &callsites {
            for t in cs
                .type_args
                .iter()
                .chain(cs.implicit_args.iter().flat_map(|a| a.type_refs()))
            {
                for h in t.heads() {
                    table.add_external(h.clone());
                }
            }
        }

        callsites.sort();
        callsites.dedup();
        Ok(Corpus {
            projects,
            modules,
            table,
            callsites,
            flagged,
        })
    }

    pub fn project_of(&self, module: &ModuleId) -> Option<&ProjectId> {
        self.modules.get(module).map(|m| &m.project)
    }

    /// Modules of projects that have a project record (the analysis
    /// subjects); other modules only provide dependency declarations.
    pub fn subject_modules(&self) -> impl Iterator<Item = &ModuleMeta> {
        self.modules.values().filter(|m| self.projects.contains_key(&m.project))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_snapshot(path, CORPUS_MAGIC, self)
    }

    pub fn load(path: &Path) -> Result<Corpus> {
        read_snapshot(path, CORPUS_MAGIC, "corpus")
    }
}

/// A corpus with retention verdicts and idiom labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledCorpus {
    pub corpus: Corpus,
    pub config: Config,
    pub verdicts: Vec<RetentionVerdict>,
    /// Canonical, unflagged modules of retained projects.
    pub analyzed: BTreeSet<ModuleId>,
    pub classification: Classification,
}

impl LabeledCorpus {
    pub fn classify(corpus: Corpus, config: Config) -> Result<LabeledCorpus> {
        let verdicts = corpus
            .projects
            .values()
            .map(retain_project)
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let retained: BTreeSet<&ProjectId> = verdicts.iter().filter(|v| v.retained).map(|v| &v.project).collect();

        let mut analyzed = BTreeSet::new();
        for p in &retained {
            let modules = corpus.subject_modules().filter(|m| &&m.project == p);
            analyzed.extend(canonical_modules(modules));
        }
        analyzed.retain(|m| !corpus.flagged.contains_key(m));

        let classification = classify_corpus(&corpus.table, &corpus.modules, &corpus.callsites, &analyzed, &config)?;
        Ok(LabeledCorpus {
            corpus,
            config,
            verdicts,
            analyzed,
            classification,
        })
    }

    /// Analyzed call sites paired with their idiom.
    pub fn labeled_callsites(&self) -> impl Iterator<Item = (&CallSite, crate::classify::CallSiteIdiom)> {
        self.corpus
            .callsites
            .iter()
            .zip(&self.classification.callsite_idioms)
            .filter_map(|(cs, i)| i.map(|i| (cs, i)))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_snapshot(path, LABELED_MAGIC, self)
    }

    pub fn load(path: &Path) -> Result<LabeledCorpus> {
        read_snapshot(path, LABELED_MAGIC, "labeled corpus")
    }
}

pub fn encode_snapshot<T: Serialize>(magic: &[u8; 8], value: &T, out: &mut impl Write) -> Result<(), SnapshotError> {
    out.write_all(magic).map_err(|e| SnapshotError::Codec(e.into()))?;
    out.write_all(&SNAPSHOT_VERSION.to_le_bytes())
        .map_err(|e| SnapshotError::Codec(e.into()))?;
    bincode::serialize_into(out, value)?;
    Ok(())
}

pub fn decode_snapshot<T: DeserializeOwned>(
    magic: &[u8; 8],
    expected: &'static str,
    input: &mut impl Read,
) -> Result<T, SnapshotError> {
    let mut header = [0u8; 12];
    input
        .read_exact(&mut header)
        .map_err(|_| SnapshotError::BadMagic { expected })?;
    if &header[..8] != magic {
        return Err(SnapshotError::BadMagic { expected });
    }
    let found = u32::from_le_bytes(header[8..].try_into().expect("four bytes"));
    if found != SNAPSHOT_VERSION {
        return Err(SnapshotError::Version { found });
    }
    Ok(bincode::deserialize_from(input)?)
}

fn write_snapshot<T: Serialize>(path: &Path, magic: &[u8; 8], value: &T) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    let mut w = BufWriter::new(file);
    encode_snapshot(magic, value, &mut w)?;
    w.flush()
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn read_snapshot<T: DeserializeOwned>(path: &Path, magic: &[u8; 8], expected: &'static str) -> Result<T> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    Ok(decode_snapshot(magic, expected, &mut BufReader::new(file))?)
}
