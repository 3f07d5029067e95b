use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the spectral library and its front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("symbol evaluation failed at mu = {mu}: {reason}")]
    Evaluation { mu: f64, reason: String },

    #[error("capability error: {0}")]
    Capability(String),

    #[error("unsupported exponent p = {0} (need 1 < p < inf)")]
    UnsupportedExponent(f64),

    #[error("kernel evaluated on the diagonal x = y")]
    DiagonalExcluded,

    #[error("input error: {0}")]
    Input(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
