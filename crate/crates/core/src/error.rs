use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Exhaustive search requested beyond its supported size.
    #[error("unsupported size: {what} is {got}, exhaustive search supports at most {max}")]
    UnsupportedSize {
        what: &'static str,
        got: usize,
        max: usize,
    },

    /// A hypothesis that the caller must guarantee does not hold. Distinct
    /// from a conclusion failing.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate structure: {0}")]
    Degenerate(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
