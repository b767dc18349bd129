use thiserror::Error;

/// Errors raised by the numerical and modelling layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("cannot condition on age {age}: survival probability is zero")]
    ImpossibleCondition { age: f64 },

    #[error("quadrature did not reach tolerance {tolerance:e} (best estimate {estimate}, error {error:e})")]
    Accuracy {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("grid step too coarse for a stable solve (1 - h/2 * k(0) = {pivot}); use a finer grid")]
    Instability { pivot: f64 },

    #[error("bracket [{lo}, {hi}] does not straddle target {target}")]
    Bracketing { lo: f64, hi: f64, target: f64 },

    #[error("survival underflows on the grid; largest valid time is {largest_valid_t}")]
    SurvivalUnderflow { largest_valid_t: f64 },

    #[error("invalid process specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
