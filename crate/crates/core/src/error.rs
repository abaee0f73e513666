//! Error type shared by the whole library.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point outside the admissible domain: {0}")]
    OutOfDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("quadrature failed to converge: {0}")]
    Convergence(String),

    #[error("kernel truncation degree insufficient for tail tolerance (|x||y| = {t}, requested tol {tol})")]
    TruncationInsufficient { t: f64, tol: f64 },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
