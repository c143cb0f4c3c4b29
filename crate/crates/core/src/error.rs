use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while constructing codes or running the decoders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("division by the zero polynomial")]
    DivisionByZero,

    #[error("polynomial {poly} is not primitive of degree {m}: {reason}")]
    NotPrimitive {
        poly: String,
        m: u32,
        reason: String,
    },

    #[error("invalid code construction: {0}")]
    InvalidCode(String),

    #[error("unknown code name {name:?} (try one of: {known})")]
    UnknownCode { name: String, known: String },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid interleaver: {0}")]
    InvalidInterleaver(String),

    #[error("no confidence table for code {code} (run `gpcb calibrate` first)")]
    MissingConfidenceTable { code: String },

    #[error("malformed {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
