use thiserror::Error;

/// Errors raised by the algebra library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension must be positive")]
    EmptyDimension,

    #[error("form not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("form not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("singular linear solve")]
    SingularSolve,

    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,

    #[error("not an idempotent: residual |c^2 - c| = {residual:e} exceeds {tol:e}")]
    NotIdempotent { residual: f64, tol: f64 },

    #[error("zero algebra: u \u{2261} 0")]
    ZeroAlgebra,

    #[error("subspace is not closed under multiplication (residual {residual:e})")]
    NotSubalgebra { residual: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("non-finite value in input")]
    NonFinite,
}

pub type Result<T, E = AlgebraError> = std::result::Result<T, E>;
