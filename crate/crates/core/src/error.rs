use thiserror::Error;

/// Errors raised by map evaluation, partition construction and the estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("root finder did not converge: residual {residual:e} after {iterations} iterations")]
    Convergence { residual: f64, iterations: u32 },

    #[error("partition depth {requested} exceeds floating-point resolution (max achievable {max_achievable})")]
    Depth { requested: usize, max_achievable: usize },

    #[error("first return to I_{m} not reached within {cap} iterations (last point {last:e})")]
    CapExceeded {
        m: usize,
        cap: usize,
        last: f64,
        partial: Vec<f64>,
    },

    #[error("quadrature did not converge: achieved error bound {error_bound:e}")]
    Quadrature { value: f64, error_bound: f64 },

    #[error("too few events: {0}")]
    Starvation(String),

    #[error("Ulam iteration did not converge: residual {residual:e} after {iterations} iterations")]
    UlamConvergence { residual: f64, iterations: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn parameter(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
