use crate::classify::ClassifyError;
use crate::config::ConfigError;
use crate::corpus::SnapshotError;
use crate::dedup::DedupError;
use crate::extract::SyntheticError;
use crate::ingest::{DesugarError, LinkError, ParseError};
use crate::metrics::MetricsError;
use crate::model::ConformanceError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{source_name}: {error}")]
    Parse { source_name: String, error: ParseError },
    #[error(transparent)]
    Desugar(#[from] DesugarError),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error("module {module}: {error}")]
    Synthetic { module: String, error: SyntheticError },
    #[error(transparent)]
    Conformance(#[from] ConformanceError),
    #[error(transparent)]
    Dedup(#[from] DedupError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// Facts that parse but contradict each other, as opposed to malformed input.
    pub fn is_inconsistency(&self) -> bool {
        matches!(
            self,
            Error::Link(_) | Error::Synthetic { .. } | Error::Conformance(_) | Error::Classify(_) | Error::Metrics(_)
        )
    }
}
