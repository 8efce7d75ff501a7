//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// I/O failure, annotated with the path involved.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A line of an input file failed to parse or violated an invariant.
    /// Lines are 1-based.
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A table file contained no rows, so its dimension is undefined.
    #[error("{path}: empty table")]
    EmptyTable { path: PathBuf },

    /// Invalid configuration value.
    #[error("invalid {what}: {message}")]
    InvalidConfig { what: &'static str, message: String },

    /// Vector or matrix dimensions do not line up.
    #[error("{context}: expected dimension {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// Paired inputs of unequal length.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// An operation that needs at least one element received none.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// A forecasting operation received an empty series.
    #[error("empty series")]
    EmptySeries,

    /// A series is too short for the requested operation.
    #[error("series too short: need at least {needed} values, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    /// A job_id that does not resolve to a known job.
    #[error("unknown job_id {job_id:?}")]
    UnknownJob { job_id: String },

    /// Day value not present in the configured day list.
    #[error("unlisted day: {day}")]
    UnlistedDay { day: u32 },

    /// Catch-all validation failure with a formatted message.
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(
        path: impl Into<PathBuf>,
        line: usize,
        message: impl Into<String>,
    ) -> Self {
        Error::Malformed {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
