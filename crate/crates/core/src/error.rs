use alloc::string::String;

/// Everything that can go wrong in the core crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("basis is singular")]
    SingularBasis,

    #[error("dimension {dim} exceeds the enumeration cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("no prime in [{lo}, {hi}]")]
    NoPrimeInInterval { lo: u64, hi: u64 },

    #[error("vector is zero")]
    ZeroVector,

    #[error("vector is not a lattice member")]
    NotMember,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("rejection loop gave up after {iterations} iterations")]
    IterationCap { iterations: u64 },

    #[error("integer overflow in exact arithmetic")]
    Overflow,

    #[error("norm comparison is within the floating-point margin")]
    AmbiguousComparison,

    #[error("every oracle sample was zero")]
    AllSamplesZero,
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
