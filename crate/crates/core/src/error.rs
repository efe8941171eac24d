use std::path::PathBuf;

use thiserror::Error;

/// Errors produced while loading data or running analyses.
#[derive(Debug, Error)]
pub enum Error {
    /// A malformed input row. `line` is 1-based.
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    /// Inputs could not be joined into a corpus.
    #[error("join error: {0}")]
    Join(String),

    /// Invalid configuration or manifest.
    #[error("configuration error: {0}")]
    Config(String),

    /// A correlation is undefined (too few items or a constant vector).
    #[error("undefined correlation: {reason} ({n_groups_excluded} groups excluded)")]
    UndefinedCorrelation { reason: String, n_groups_excluded: usize },

    /// A score fell outside its declared range and clamping was disabled.
    #[error("score {score} outside declared range [{min}, {max}]")]
    OutOfRange { score: f64, min: f64, max: f64 },

    /// A precondition on a numeric argument was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn undefined(reason: impl Into<String>) -> Self {
        Error::UndefinedCorrelation {
            reason: reason.into(),
            n_groups_excluded: 0,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
