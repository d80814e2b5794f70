//! Dense linear algebra kernel: symmetric eigendecomposition, PSD inverse
//! square roots, spectral norms and rank/span decisions with explicit
//! tolerances. Integer rank and membership questions go through exact
//! fraction-free elimination in [`exact`].

mod eigen;
pub mod exact;
mod matrix;
mod subspace;

use thiserror::Error;

pub use eigen::{inv_sqrt_psd, spectral_norm, spectral_norm_sym, sym_eigen, SymEigen, JACOBI_SWEEPS};
pub use matrix::{dot, norm, Matrix};
pub use subspace::{orthonormalize, right_svd, span_of, span_of_integer, Subspace, RANK_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not symmetric")]
    NonSymmetric,
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("eigensolver did not converge within {JACOBI_SWEEPS} sweeps")]
    NonConvergent,
    #[error("matrix is not positive definite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("empty input")]
    EmptyInput,
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("basis is not orthonormal")]
    NotOrthonormal,
    #[error("vectors are linearly dependent")]
    RankDeficient,
}
