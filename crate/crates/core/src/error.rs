use thiserror::Error;

/// Errors raised by the library. Every variant is a violated precondition;
/// numeric degeneracies (zero rate, infinite case bounds) are values, not
/// errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(f64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid code parameters: {0}")]
    InvalidCode(String),
    #[error("codebook of {size} messages exceeds the enumeration cap {cap}")]
    CapExceeded { size: u128, cap: u64 },
    #[error("decoder search space is empty (k = {0} < 2)")]
    EmptySearchSpace(usize),
    #[error("cannot parse gain {0:?}")]
    ParseGain(String),
    #[error("invalid channel matrix: {0}")]
    InvalidChannel(String),
    #[error("gain assumption violated: {0}")]
    GainAssumption(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
