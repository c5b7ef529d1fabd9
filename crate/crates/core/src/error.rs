use thiserror::Error;

/// Errors raised by the core numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("deformation gradient has non-positive Jacobian (det F = {0})")]
    NonPositiveJacobian(f64),
    #[error("right Cauchy-Green tensor is singular (|det C| = {0})")]
    SingularC(f64),
    #[error("stress is not coaxial with C (off-diagonal residual {residual:e}, tolerance {tolerance:e})")]
    NotCoaxial { residual: f64, tolerance: f64 },
    #[error("invariant kind mismatch: expected {expected}, got {got}")]
    KindMismatch { expected: &'static str, got: &'static str },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point cloud is degenerate (coplanar or too few points)")]
    DegenerateCloud,
    #[error("invariant triple ({0}, {1}, {2}) does not correspond to a physical deformation")]
    Unphysical(f64, f64, f64),
    #[error("could not place {placed} of {wanted} initial points within {attempts} attempts")]
    InitializationFailure {
        placed: usize,
        wanted: usize,
        attempts: usize,
    },
    #[error("nonlinear solve did not converge (best residual {0:e})")]
    NoConvergence(f64),
    #[error("correlation matrix is ill-conditioned even with nugget {0:e}")]
    IllConditioned(f64),
    #[error("training inputs {0} and {1} coincide")]
    DuplicateInputs(usize, usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("model file: {0}")]
    Persistence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
