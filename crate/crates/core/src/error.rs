use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates its documented range or a dimension does not match.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The data itself is unusable (non-finite values, zero reference signal, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The operator handed to the eigensolver is not normal.
    #[error("unsupported operator: commutator deviation {deviation:e} exceeds {tolerance:e}")]
    UnsupportedOperator { deviation: f64, tolerance: f64 },

    #[error("parse error in {path} at row {row}{}: {message}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        path: PathBuf,
        row: usize,
        column: Option<usize>,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
