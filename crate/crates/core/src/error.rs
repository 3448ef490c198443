use thiserror::Error;

/// Errors raised by the solvers and geometric primitives.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration failed at theta = {theta}: {reason}")]
    Integration { theta: f64, reason: String },

    #[error("no zero of z_{l} below theta = {cap} at lambda = {lambda}")]
    ZeroNotFound { l: u32, lambda: f64, cap: f64 },

    #[error("lambda = {lambda} is not the first eigenvalue of any ball with radius <= {cap}")]
    NotRepresentable { lambda: f64, cap: f64 },

    #[error("unsupported dimension n = {0}; only n = 2 is available here")]
    UnsupportedDimension(usize),

    #[error("mesh generation failed: {0}")]
    Mesh(String),

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("normalization mismatch: {0}")]
    Normalization(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
