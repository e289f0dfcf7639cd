use thiserror::Error;

/// Errors raised by the library layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("not a circuit: {0}")]
    NotACircuit(String),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("at least one trial is required")]
    InsufficientTrials,
    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),
    #[error("slim configuration parameter a={a} outside 0..={max}")]
    InvalidA { a: usize, max: usize },
    #[error("{n} bits exceed the exact transform limit of {max}")]
    TooManyBits { n: usize, max: usize },
    #[error("spectral distributions live on different bit sets ({0} vs {1})")]
    MismatchedBitSets(usize, usize),
    #[error("no theta estimate for radius {0}")]
    MissingTheta(u32),
    #[error("local time series has zero mass")]
    ZeroMass,
    #[error("extra-head index not found within {0} time units")]
    RunLengthExceeded(u64),
    #[error("a fit needs at least {need} points, got {got}")]
    InsufficientPoints { need: usize, got: usize },
    #[error("malformed data: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
