use thiserror::Error;

use crate::params::ValidationReport;

/// Errors produced by the analytic, oracle and design layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(ValidationReport),

    #[error("truncation bound {given} below closed-form switch point {required}")]
    TruncationTooSmall { given: u32, required: u32 },

    #[error("stationary solve did not converge after {iterations} iterations (residual {residual:.3e}, tol {tol:.3e})")]
    NonConvergence {
        iterations: u64,
        residual: f64,
        tol: f64,
    },

    #[error("singular linear system in stationary solve")]
    SingularSystem,

    #[error(
        "truncation too coarse: tail contribution bound {tail_bound:.3e} exceeds 1e-6 of value {value:.3e}"
    )]
    TruncationTooCoarse { tail_bound: f64, value: f64 },

    #[error("outside the high-load regime: mu - lambda = {slack} exceeds nu = {nu}")]
    RegimeViolation { slack: f64, nu: f64 },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
