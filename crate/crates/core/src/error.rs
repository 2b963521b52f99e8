use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("q = {q} is not an odd prime >= 3")]
    NotOddPrime { q: u64 },

    #[error("dimension d = {d} must be >= 1")]
    InvalidDimension { d: u32 },

    #[error("q^d overflows the platform index range (q = {q}, d = {d})")]
    SpaceTooLarge { q: u64, d: u32 },

    #[error("expected {expected} coordinates, got {got}")]
    CoordCount { expected: u32, got: usize },

    #[error("point index {index} out of range (space size {size})")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("operands belong to different field parameters")]
    ParamsMismatch,

    #[error("distance t = 0 is rejected: the statement requires t != 0")]
    ZeroDistance,

    #[error("{what}: estimated work {estimate:.3e} exceeds the scale guard {limit:.3e}")]
    ScaleGuard {
        what: &'static str,
        estimate: f64,
        limit: f64,
    },

    #[error("integer count overflowed 128 bits")]
    CountOverflow,

    #[error("spectral result deviated from an integer by {deviation:.3e}")]
    SpectralRounding { deviation: f64 },

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
}

pub type Result<T> = std::result::Result<T, Error>;
