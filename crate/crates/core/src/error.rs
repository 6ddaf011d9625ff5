use alloc::string::String;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("density integrates to {integral}, expected 1 within {tolerance:e}")]
    NotNormalized { integral: f64, tolerance: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("likelihoods sum to {sum} at m = {m}")]
    IncompleteModel { m: f64, sum: f64 },
    #[error("unknown outcome {0:?}")]
    UnknownOutcome(String),
    #[error(
        "outcome {outcome:?} has marginal probability {probability:e}; cannot condition on it"
    )]
    DegenerateOutcome { outcome: String, probability: f64 },
    #[error("incoherent gain {0:e} bits is too small to form a ratio")]
    DegenerateRatio(f64),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        expected,
    }
}

/// Checks `0 <= m <= 1`.
pub(crate) fn check_unit(name: &'static str, m: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&m) {
        Ok(m)
    } else {
        Err(domain(name, m, "must lie in [0, 1]"))
    }
}
