use thiserror::Error;

use crate::distance::DistanceResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not a rotation: orthogonality/determinant defect {defect:e} exceeds {tol:e}")]
    InvalidRotation { defect: f64, tol: f64 },

    #[error("parameter `{0}` must be finite")]
    NonFinite(&'static str),

    #[error("{0}")]
    OutOfDomain(String),

    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { got: usize, need: usize },

    #[error("sub-Riemannian logarithm did not converge: residual {residual:e} > {tol:e}")]
    NoConvergence {
        residual: f64,
        tol: f64,
        best: Box<DistanceResult>,
    },
}
