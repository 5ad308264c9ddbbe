//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not unitary: defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    NotUnitary { defect: f64, tol: f64 },
    #[error("state is not normalized: |<psi|psi> - 1| = {defect:.3e}")]
    NotNormalized { defect: f64 },
    #[error("dense realization of dimension {dim} exceeds the configured limit {limit}")]
    DenseLimitExceeded { dim: usize, limit: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("lowering requires {required} ancillas but the budget is capped at {cap}")]
    AncillaBudget { required: usize, cap: usize },
    #[error("eigendecomposition residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    EigenResidual { residual: f64, tol: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
