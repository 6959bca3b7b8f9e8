use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("input vector u must have at least one nonzero component")]
    ZeroInput,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sparsity level {k} out of range 1..={max}")]
    SparsityOutOfRange { k: usize, max: usize },

    #[error("bridge shrinkage has no admissible root for |tau| = {tau}, lambda = {lambda}")]
    BridgeNoRoot { tau: f64, lambda: f64 },

    #[error("weights must be nonnegative and sum to one")]
    WeightContract,

    #[error("least-distance oracle did not converge within {iterations} iterations")]
    OracleNonConvergence { iterations: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("realization {index}: {source}")]
    Realization {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    /// True for errors caused by user-supplied configuration rather than by a run.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) | Error::SparsityOutOfRange { .. } => {
                true
            }
            Error::Realization { source, .. } => source.is_config(),
            _ => false,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
