use thiserror::Error;

/// Errors reported by the samplers and their helpers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplerError {
    /// Extraction was requested while the total rate is zero.
    #[error("cannot extract from a structure whose total rate is zero")]
    EmptyStructure,
    /// The handle was never issued by this structure or its outcome was deleted.
    #[error("handle does not refer to a live outcome")]
    StaleHandle,
    /// The rate is above the ceiling the structure was configured with.
    #[error("rate {rate} exceeds the configured maximum {max}")]
    RateExceedsMax { rate: f64, max: f64 },
    /// The rate is negative, NaN or infinite.
    #[error("rate {0} is negative or not finite")]
    InvalidRate(f64),
    /// The rejection loop hit its attempt cap without accepting an outcome.
    #[error("no outcome accepted after {0} attempts")]
    AttemptLimitExceeded(u64),
    /// A constructor argument is out of its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = SamplerError> = std::result::Result<T, E>;

/// A broken structural invariant found by one of the full-scan checkers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invariant violated: {0}")]
pub struct InvariantViolation(pub String);

macro_rules! ensure_invariant {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err($crate::error::InvariantViolation(format!($($fmt)+)));
        }
    };
}
pub(crate) use ensure_invariant;
