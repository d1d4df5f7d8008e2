use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the OddEEC library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid length: {0}")]
    InvalidLength(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("sketch specs differ ({left:#018x} vs {right:#018x})")]
    SpecMismatch { left: u64, right: u64 },

    /// The method-of-moments estimator is undefined once z reaches n/2.
    #[error("sketch saturated: z = {z} >= n/2 with n = {n}")]
    Saturated { z: usize, n: usize },

    #[error("no sampling length satisfies the safety condition: {0}")]
    Infeasible(String),

    #[error("observation out of range: {0}")]
    OutOfRange(String),

    #[error("unknown configuration: {0}")]
    UnknownConfig(String),

    #[error("malformed {what}: {reason}")]
    Format { what: &'static str, reason: String },

    #[error("{}: {source}", path.display())]
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

    pub(crate) fn format(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Format {
            what,
            reason: reason.into(),
        }
    }
}
