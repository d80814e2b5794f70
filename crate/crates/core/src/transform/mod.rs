//! Forster transforms on a heavy-free subspace and the iterated
//! decomposition of a point set into certified pieces.

mod piece;

pub use piece::{
    verify_piece, Certificate, CertificateReport, DecompositionRecord, ForsterDecomposition, ForsterPiece, PieceRecord, EPS_NUM, TRACE_TOL,
};

use crate::dataset::PointSet;
use crate::heavy::{find_heavy_spanning, HeavyError};
use crate::linalg::exact::ExactSpan;
use crate::linalg::{inv_sqrt_psd, norm, span_of_integer, LinalgError};
use crate::scaling::{solve_scaling_with, unit_second_moment, ScalingError, SolverOptions};
use crate::Mat;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransformError {
    #[error("zero point")]
    ZeroPoint,
    #[error("transform is singular on the point")]
    SingularTransform,
    #[error("empty point set")]
    Empty,
    #[error("certificate failed: spectral distance {distance:e} exceeds {delta:e}")]
    CertificateFailed { distance: f64, delta: f64 },
    #[error("{pieces} pieces exceed the bound {bound}")]
    PieceBound { pieces: usize, bound: usize },
    #[error("malformed piece: {0}")]
    Malformed(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Heavy(#[from] HeavyError),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `Ax/‖Ax‖₂`.
pub fn radial_map(a: &Mat, x: &[f64]) -> Result<Vec<f64>, TransformError> {
    if x.iter().all(|&c| c == 0.0) {
        return Err(TransformError::ZeroPoint);
    }
    let y = a.mul_vec(x)?;
    let ny = norm(&y);
    if !(ny > 0.0 && ny.is_finite()) {
        return Err(TransformError::SingularTransform);
    }
    Ok(y.iter().map(|v| v / ny).collect())
}

/// Upper bound `d·(⌈ln n⌉ + 1)` on the number of pieces.
pub fn piece_bound(dim: usize, n: usize) -> usize {
    dim * ((n as f64).ln().ceil() as usize + 1)
}

/// Walks down the chain of heavy subspaces starting from `span(S)` and puts
/// the points of the last one in approximate radial isotropic position.
///
/// On a solver or certificate failure the attempt is repeated once with `δ/2`
/// and doubled budgets.
pub fn forster_transform(points: &PointSet, delta: f64) -> Result<ForsterPiece, TransformError> {
    if points.is_empty() {
        return Err(TransformError::Empty);
    }
    let mut idx: Vec<usize> = (0..points.len()).collect();
    let mut sub = points.clone();
    loop {
        let res = find_heavy_spanning(&sub)?;
        if !res.found {
            break;
        }
        idx = res.members.iter().map(|&j| idx[j]).collect();
        sub = points.subset(&idx);
    }
    let mut span = ExactSpan::new(points.dim());
    let generators: Vec<Vec<i64>> = sub.points().iter().filter(|p| span.insert(p)).cloned().collect();
    let refs: Vec<&[i64]> = generators.iter().map(Vec::as_slice).collect();
    let (space, _) = span_of_integer(points.dim(), &refs)?;

    let d0 = ExactSpan::from_points(points.dim(), points.points().iter().map(Vec::as_slice)).rank();
    if idx.len() * d0 < space.dim() * points.len() {
        return Err(TransformError::Invariant("piece holds less than its dimension share".into()));
    }

    let attempt = |delta: f64, opts: SolverOptions| -> Result<ForsterPiece, TransformError> {
        let weights = solve_scaling_with(&sub, &space, delta, opts)?;
        let mut sigma = unit_second_moment(&sub, &space, &weights.unit_weights)?;
        // The transform is defined up to a positive scale; fix tr(Σ_c) = 1.
        let tr = sigma.trace();
        sigma = sigma.scale(1.0 / tr);
        let a = inv_sqrt_psd(&sigma, f64::MIN_POSITIVE)?;
        let provisional = Certificate { lambda_min: f64::NAN, lambda_max: f64::NAN, delta };
        let mut piece = ForsterPiece::new(idx.clone(), space.clone(), generators.clone(), a, weights, provisional);
        let report = verify_piece(&piece, points);
        piece.certificate = Certificate { lambda_min: report.lambda_min, lambda_max: report.lambda_max, delta };
        if !report.pass || !piece.certificate.in_window(piece.dim()) {
            return Err(TransformError::CertificateFailed { distance: report.distance, delta });
        }
        Ok(piece)
    };
    attempt(delta, SolverOptions::default()).or_else(|_| {
        let d = SolverOptions::default();
        attempt(delta / 2.0, SolverOptions { fixed_point_iters: 2 * d.fixed_point_iters, ellipsoid_budget_factor: 2.0 * d.ellipsoid_budget_factor })
    })
}

/// Applies [`forster_transform`] to the residual set until every point
/// belongs to a piece.
pub fn forster_decompose(points: &PointSet, delta: f64) -> Result<ForsterDecomposition, TransformError> {
    if points.is_empty() {
        return Err(TransformError::Empty);
    }
    let bound = piece_bound(points.dim(), points.len());
    let mut residual: Vec<usize> = (0..points.len()).collect();
    let mut pieces = Vec::new();
    while !residual.is_empty() {
        let sub = points.subset(&residual);
        let mut piece = forster_transform(&sub, delta)?;
        let taken: Vec<usize> = piece.members.iter().map(|&j| residual[j]).collect();
        piece.members = taken;
        let mut inside = vec![false; points.len()];
        piece.members.iter().for_each(|&i| inside[i] = true);
        residual.retain(|&i| !inside[i]);
        pieces.push(piece);
        if pieces.len() > bound {
            return Err(TransformError::PieceBound { pieces: pieces.len(), bound });
        }
    }
    Ok(ForsterDecomposition { pieces, source: points.clone() })
}
