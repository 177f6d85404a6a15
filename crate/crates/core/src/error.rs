use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("unsupported set: {0}")]
    UnsupportedSet(String),
    #[error("unsupported dictionary: {0}")]
    UnsupportedDictionary(String),
    #[error("invalid custom schedule: {0}")]
    InvalidCustom(String),
    #[error("invalid instance: {0}")]
    InstanceInvalid(String),
    #[error("cone pair has a common nonzero direction")]
    IntersectionNotTrivial,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("cluster supports are not interleaved")]
    NotInterleaved,
    #[error("segment uses an index outside the admissible set")]
    SegmentIndexOutside,
    #[error("need at least 3 stored tail iterates, have {have}")]
    InsufficientIterates { have: usize },
    #[error("generator gave up after {attempts} attempts")]
    RetryExhausted { attempts: usize },
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
