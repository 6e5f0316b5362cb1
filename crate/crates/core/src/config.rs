//! Classification and attribution settings, loadable from a JSON file.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::SymbolId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct Config {
    /// Return types with this head are treated as `Unit`.
    pub unit_id: SymbolId,
    /// The one-argument function type.
    pub function_id: SymbolId,
    /// Implicit parameter heads that mark a type proof.
    pub constraint_ids: BTreeSet<SymbolId>,
    /// `group:artifact` of the standard library.
    pub stdlib_coordinate: String,
    /// Artifact names (without Scala version suffix) of test frameworks.
    pub test_frameworks: BTreeSet<String>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            unit_id: SymbolId::from("scala/Unit#"),
            function_id: SymbolId::from("scala/Function1#"),
            constraint_ids: [
                "scala/Predef.`=:=`#",
                "scala/Predef.`<:<`#",
                "scala/`=:=`#",
                "scala/`<:<`#",
                "scala/Function1#",
            ]
            .into_iter()
            .map(SymbolId::from)
            .collect(),
            stdlib_coordinate: "org.scala-lang:scala-library".to_owned(),
            test_frameworks: ["scalatest", "specs2", "scalacheck", "munit", "utest"]
                .into_iter()
                .map(str::to_owned)
                .collect(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Config {
    pub fn from_json(text: &str) -> Result<Config, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Config::from_json(&text).map_err(|source| ConfigError::Parse {
            path: path.display().to_string(),
            source,
        })
    }
}
