use std::cmp::Ordering;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{ModuleId, ProjectId};

labeled_enum! {
    pub enum Platform {
        Jvm => "JVM",
        Js => "JS",
        Native => "NATIVE",
    }
}

impl Platform {
    /// Lower ranks win when choosing a canonical build.
    pub fn preference_rank(self) -> u8 {
        match self {
            Platform::Jvm => 0,
            Platform::Js => 1,
            Platform::Native => 2,
        }
    }
}

/// Repository-level metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectMeta {
    pub id: ProjectId,
    pub stars: u64,
    pub commits: u64,
    pub first_commit: NaiveDate,
    pub last_commit: NaiveDate,
    /// File-level duplication ratio computed upstream, in `[0, 1]`.
    pub dup_ratio: f64,
    /// Listed in the package index.
    pub in_index: bool,
}

/// Build-module metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleMeta {
    pub id: ModuleId,
    pub project: ProjectId,
    pub group: String,
    pub artifact: String,
    pub version: String,
    pub platform: Platform,
    pub scala_version: String,
    pub loc_main: u64,
    pub loc_test: u64,
    pub total_call_sites: u64,
    /// Portion of `total_call_sites` located under test paths.
    pub test_call_sites: u64,
}

impl ModuleMeta {
    /// `group:artifact` with any Scala binary-version suffix dropped.
    pub fn coordinate(&self) -> String {
        format!("{}:{}", self.group, self.artifact_base())
    }

    /// Artifact name without a trailing `_2.12` / `_sjs0.6_2.12` style suffix.
    pub fn artifact_base(&self) -> &str {
        let mut name = self.artifact.as_str();
        while let Some(idx) = name.rfind('_') {
            let suffix = &name[idx + 1..];
            let looks_like_version = suffix.starts_with("sjs")
                || suffix.starts_with("native")
                || (!suffix.is_empty() && suffix.chars().all(|c| c.is_ascii_digit() || c == '.'));
            if looks_like_version && idx > 0 {
                name = &name[..idx];
            } else {
                break;
            }
        }
        name
    }

    pub fn is_grouped(&self) -> bool {
        !self.group.is_empty() && !self.artifact.is_empty()
    }
}

/// Numeric `(major, minor, patch)`; `None` for unparseable versions,
/// which sort below every known version.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalaVersion(pub Option<(u32, u32, u32)>);

impl ScalaVersion {
    pub fn parse(s: &str) -> ScalaVersion {
        let mut parts = s.trim().split('.');
        let mut num = |required: bool| -> Option<u32> {
            match parts.next() {
                Some(p) => {
                    let digits: String = p.chars().take_while(|c| c.is_ascii_digit()).collect();
                    digits.parse().ok()
                }
                None if required => None,
                None => Some(0),
            }
        };
        let major = num(true);
        let minor = num(true);
        let patch = num(false);
        match (major, minor, patch) {
            (Some(a), Some(b), Some(c)) => ScalaVersion(Some((a, b, c))),
            _ => ScalaVersion(None),
        }
    }
}

impl PartialOrd for ScalaVersion {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ScalaVersion {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.0, other.0) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(a), Some(b)) => a.cmp(&b),
        }
    }
}
