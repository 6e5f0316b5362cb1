//! Project retention rules and cross-build module deduplication.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ingest::module_preference;
use crate::model::{ModuleId, ModuleMeta, ProjectId, ProjectMeta};

/// Minimum span between first and last commit for a project to count as active.
pub const MIN_ACTIVE_DAYS: i64 = 61;

labeled_enum! {
    pub enum RetentionRule {
        Commits => "R1_COMMITS",
        Activity => "R2_ACTIVITY",
        Dup75 => "R3_DUP75",
        Dup80 => "R4_DUP80",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RetentionVerdict {
    pub project: ProjectId,
    pub retained: bool,
    pub failed_rules: Vec<RetentionRule>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DedupError {
    #[error("project {0}: last commit precedes first commit")]
    DateOrder(ProjectId),
    #[error("project {project}: duplication ratio {ratio} outside [0, 1]")]
    DupRatio { project: ProjectId, ratio: f64 },
}

pub fn retain_project(meta: &ProjectMeta) -> Result<RetentionVerdict, DedupError> {
    if meta.last_commit < meta.first_commit {
        return Err(DedupError::DateOrder(meta.id.clone()));
    }
    if !(0.0..=1.0).contains(&meta.dup_ratio) {
        return Err(DedupError::DupRatio {
            project: meta.id.clone(),
            ratio: meta.dup_ratio,
        });
    }
    let active_days = (meta.last_commit - meta.first_commit).num_days();
    let checks = [
        (RetentionRule::Commits, meta.commits > 1),
        (RetentionRule::Activity, active_days >= MIN_ACTIVE_DAYS),
        (
            RetentionRule::Dup75,
            meta.in_index || meta.dup_ratio < 0.75 || meta.stars > 5,
        ),
        (
            RetentionRule::Dup80,
            meta.in_index || meta.dup_ratio < 0.80 || meta.stars > 500,
        ),
    ];
    let failed_rules: Vec<_> = checks.iter().filter(|(_, ok)| !ok).map(|(r, _)| *r).collect();
    Ok(RetentionVerdict {
        project: meta.id.clone(),
        retained: failed_rules.is_empty(),
        failed_rules,
    })
}

/// One survivor per `(group, artifact)` build family. Modules without
/// coordinates are never grouped and all survive.
pub fn canonical_modules<'a>(modules: impl IntoIterator<Item = &'a ModuleMeta>) -> BTreeSet<ModuleId> {
    let mut best: BTreeMap<(String, String), &ModuleMeta> = BTreeMap::new();
    let mut out = BTreeSet::new();
    for m in modules {
        if !m.is_grouped() {
            out.insert(m.id.clone());
            continue;
        }
        let key = (m.group.clone(), m.artifact_base().to_owned());
        match best.get(&key) {
            Some(cur) if module_preference(cur) <= module_preference(m) => {}
            _ => {
                best.insert(key, m);
            }
        }
    }
    out.extend(best.into_values().map(|m| m.id.clone()));
    out
}
