use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (non-finite
    /// values, empty inputs, non-positive temperatures, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested network size is not supported by the plan family.
    #[error("unsupported network size {n}: {reason}")]
    UnsupportedSize { n: usize, reason: &'static str },

    /// The operation is not defined for this sigmoid.
    #[error("unsupported for sigmoid `{kind}`: {reason}")]
    Unsupported {
        kind: &'static str,
        reason: &'static str,
    },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: String, actual: String },

    /// The object is in a state that does not allow the operation,
    /// e.g. a backward pass on a result whose cache was dropped.
    #[error("invalid state: {0}")]
    State(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn shape(expected: impl ToString, actual: impl ToString) -> Self {
        Error::Shape {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn ensure_finite(what: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} must be finite, got {value}")))
    }
}
