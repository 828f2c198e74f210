use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("matrix is not symmetric (max relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("parameter vector has {found} entries but the structure has {expected} edges")]
    StructureMismatch { expected: usize, found: usize },
    #[error("{what} too large: {size} exceeds limit {limit}")]
    TooLarge { what: &'static str, size: usize, limit: usize },
    #[error("unsupported noise model for this operation: {0}")]
    UnsupportedModel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid truncation order {0} (must be >= 1)")]
    InvalidOrder(usize),
    #[error("invalid base-point shift {0} (must be >= 1)")]
    InvalidShift(f64),
    #[error("invalid problem size: {0}")]
    InvalidSize(String),
    #[error("estimator denominator is zero or non-finite")]
    DegenerateDenominator,
    #[error("matrices do not commute (commutator norm {0:e})")]
    NonCommuting(f64),
    #[error("bootstrap sample {index} failed: {source}")]
    BootstrapSample {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("self-loop on line {line}")]
    SelfLoop { line: usize },
    #[error("edge list contains no edges")]
    EmptyGraph,
    #[error("could not find a boundary with a positive definite interior minor after {0} draws")]
    CannotStabilize(usize),
    #[error("at least 2 trials are required, got {0}")]
    InsufficientTrials(usize),
    #[error("method {method}: {source}")]
    Method {
        method: String,
        #[source]
        source: Box<Error>,
    },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
