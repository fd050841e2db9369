use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HodgeError {
    #[error("ring context mismatch: {0}")]
    ContextMismatch(String),
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("series is not invertible: {0}")]
    NonInvertible(String),
    #[error("linear system is rank deficient (rank {rank} of {unknowns}): {context}")]
    RankDeficient { rank: usize, unknowns: usize, context: String },
    #[error("linear system is inconsistent: {0}")]
    Inconsistent(String),
    #[error("degree bound violated: {0}")]
    DegreeBound(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("missing data: {0}")]
    MissingData(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("storage error: {0}")]
    Storage(String),
}

pub type Result<T> = std::result::Result<T, HodgeError>;
