use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ingest error: {0}")]
    Ingest(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed file: {reason}")]
    Malformed { path: PathBuf, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("snapshot version mismatch: expected {expected}, found {found}")]
    SnapshotVersion { expected: u32, found: u32 },

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error("evaluation: {0}")]
    Eval(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable short name of the variant, for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Ingest(_) => "ingest",
            Error::Io { .. } => "io",
            Error::Malformed { .. } => "malformed",
            Error::Precondition(_) => "precondition",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::SnapshotVersion { .. } => "snapshot-version",
            Error::Snapshot(_) => "snapshot",
            Error::Eval(_) => "eval",
            Error::Json(_) => "json",
            Error::Toml(_) => "config",
            Error::Csv(_) => "csv",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
