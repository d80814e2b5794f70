//! Generalized Forster transforms and Forster decompositions of integer point
//! sets, and a halfspace learner under Massart noise that uses them as a
//! preprocessing stage.
//!
//! The dense kernels in [`linalg`] are generic over the scalar type; the rest
//! of the crate works in `f64` through the aliases below.

pub mod dataset;
pub mod harness;
pub mod heavy;
pub mod json;
pub mod learner;
pub mod linalg;
pub mod scalar;
pub mod scaling;
pub mod transform;

pub use scalar::Real;

/// Dense `f64` matrix.
pub type Mat = linalg::Matrix<f64>;
/// `f64` subspace with an orthonormal basis.
pub type Space = linalg::Subspace<f64>;
/// `f64` eigendecomposition.
pub type Eigen = linalg::SymEigen<f64>;
