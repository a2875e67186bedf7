use thiserror::Error;

/// Crate-wide error type. Variants distinguish caller mistakes (bad
/// arguments, malformed files) from states that are mathematically
/// inadmissible (broken invariants, inconsistent statistics).
#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} outside domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("subsystem index {index} out of range for {count} subsystems")]
    SubsystemOutOfRange { index: usize, count: usize },

    #[error("total dimension {dim} exceeds cap {cap} (set SQRNG_DIM_CAP to raise)")]
    DimensionCapExceeded { dim: usize, cap: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid attack: {0}")]
    InvalidAttack(String),

    #[error("invalid bit string: {0}")]
    InvalidBits(String),

    #[error("conditioning on outcome with probability {prob:.3e} below 1e-15")]
    ZeroProbabilityOutcome { prob: f64 },

    #[error("observed statistics are inconsistent: {0}")]
    InconsistentStatistics(String),

    #[error("missing statistics for {category} rounds")]
    MissingStatistics { category: &'static str },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("hash seed length {got} does not match required {expected}")]
    SeedLengthMismatch { expected: usize, got: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
