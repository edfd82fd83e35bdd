use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical and structural layers of the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid multiplicities: {rule}")]
    InvalidMultiplicities { rule: &'static str },

    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("pole of {factor} at {at}")]
    Pole { factor: &'static str, at: Complex64 },

    #[error("r = {r} is singular: gamma_r = {gamma} coincides with a pole {lambda_k}")]
    SingularExponent { r: f64, gamma: f64, lambda_k: f64 },

    #[error("{what} did not converge (estimate {estimate}, error bound {error_bound:e})")]
    NonConvergence {
        what: &'static str,
        estimate: Complex64,
        error_bound: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("divergent configuration: {0}")]
    Divergent(String),

    #[error("ill-conditioned: {0}")]
    IllConditioned(String),
}

pub type Result<T> = std::result::Result<T, Error>;
