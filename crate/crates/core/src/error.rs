use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, DargError>;

#[derive(Debug, Error)]
pub enum DargError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("column `{0}` not found")]
    MissingColumn(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("model format error: {0}")]
    Model(String),
}

impl DargError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        DargError::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DargError::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag, used by the CLI for structured errors and exit codes.
    pub fn kind(&self) -> &'static str {
        match self {
            DargError::Io { .. } => "io",
            DargError::Parse { .. } | DargError::MissingColumn(_) => "parse",
            DargError::DimensionMismatch { .. } | DargError::InvalidArgument(_) => "invalid_input",
            DargError::Fit(_) => "fit",
            DargError::Model(_) => "model",
        }
    }
}
