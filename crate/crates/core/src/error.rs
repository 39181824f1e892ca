use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("{what} is singular at z = {z} (smallest singular value {sigma:e})")]
    SingularAt {
        what: &'static str,
        z: Complex64,
        sigma: f64,
    },
    #[error("{what} is singular (smallest singular value {sigma:e})")]
    Singular { what: &'static str, sigma: f64 },
    #[error("z = {0} lies on the support of the measure")]
    OnSupport(Complex64),
    #[error("malformed set: {0}")]
    InvalidSet(String),
    #[error("weight function is negative ({value}) at t = {t}")]
    NegativeWeight { t: f64, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("element is not in the adjoint relation (residual {0:e})")]
    NotInAdjoint(f64),
    #[error("system is not simple: Krylov rank {rank} < state dimension {dim}")]
    NotSimple { rank: usize, dim: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(tol))
    }
}
