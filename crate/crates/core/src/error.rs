use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the core algorithms and stream readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("index {index} out of range for stream of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("concept schedule is empty")]
    EmptySchedule,

    #[error("stream family {0} has no synthetic generator")]
    NotSynthetic(&'static str),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("value {0} outside [0, 1]")]
    ValueOutOfRange(f64),

    #[error("bordered system for epoch {epoch} is numerically singular (condition estimate {condition:.3e})")]
    Singular { epoch: usize, condition: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}, row {row}: {message}")]
    Csv {
        path: PathBuf,
        row: usize,
        message: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
