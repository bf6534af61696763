use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("population size {0} is not a power of two >= 2")]
    NotPowerOfTwo(usize),

    #[error("invalid pool: {0}")]
    InvalidPool(String),

    #[error("a stage must contain at least one pool")]
    EmptyBatch,

    #[error("outcome pattern has {got} bits, expected {expected}")]
    PatternLength { expected: usize, got: usize },

    #[error("pattern is inconsistent with every infection count")]
    InconsistentPattern,

    #[error("population size {0} is too large for exhaustive enumeration")]
    TooLargeForEnumeration(usize),

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("{algorithm} failed at {param} (seed {seed}): {source}")]
    Trial {
        algorithm: String,
        param: String,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("chart rendering failed: {0}")]
    Chart(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
