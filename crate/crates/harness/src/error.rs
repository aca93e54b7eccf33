use std::path::PathBuf;

use thiserror::Error;

/// Process exit code for a configuration problem.
pub const EXIT_CONFIG: i32 = 2;
/// Process exit code when a deterministic bound is violated.
pub const EXIT_VIOLATION: i32 = 3;
/// Process exit code for any other failure.
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot read config {path}: {source}")]
    ConfigRead {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{count} deterministic bound violation(s); first: {first}")]
    Violation { count: usize, first: String },
    #[error(transparent)]
    Core(#[from] ilgap_core::Error),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::ConfigRead { .. } => EXIT_CONFIG,
            Self::Violation { .. } => EXIT_VIOLATION,
            _ => EXIT_FAILURE,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
