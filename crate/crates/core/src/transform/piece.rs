use serde::{Deserialize, Serialize};

use crate::dataset::PointSet;
use crate::linalg::exact::{primitive, HybridSpan};
use crate::linalg::{norm, sym_eigen, Matrix, Subspace};
use crate::scaling::{ScalingMethod, ScalingWeights};
use crate::{Mat, Space};

use super::{radial_map, TransformError};

/// Absolute slack on the eigenvalue window and the distance bound.
pub const EPS_NUM: f64 = 1e-8;
/// Allowed deviation of the mapped second moment's trace from 1.
pub const TRACE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub delta: f64,
}

impl Certificate {
    /// Eigenvalue window `[1/(k+δ), (1+δ)/(k+δ)]` widened by [`EPS_NUM`].
    pub fn in_window(&self, k: usize) -> bool {
        let kd = k as f64 + self.delta;
        self.lambda_min >= 1.0 / kd - EPS_NUM && self.lambda_max <= (1.0 + self.delta) / kd + EPS_NUM
    }
}

/// One piece of a decomposition: the points of `S` lying in `V`, a transform
/// on `V` (in the coordinates of the stored orthonormal basis) and its
/// certificate.
#[derive(Clone, Debug)]
pub struct ForsterPiece {
    pub members: Vec<usize>,
    pub subspace: Space,
    /// Integer points spanning `V`, for exact membership tests.
    pub generators: Vec<Vec<i64>>,
    pub transform: Mat,
    pub weights: ScalingWeights,
    pub certificate: Certificate,
    exact: HybridSpan,
}

impl ForsterPiece {
    pub(crate) fn new(
        members: Vec<usize>,
        subspace: Space,
        generators: Vec<Vec<i64>>,
        transform: Mat,
        weights: ScalingWeights,
        certificate: Certificate,
    ) -> Self {
        let mut exact = HybridSpan::new(subspace.ambient_dim());
        for g in &generators {
            exact.insert(&primitive(g));
        }
        Self { members, subspace, generators, transform, weights, certificate, exact }
    }

    pub fn dim(&self) -> usize {
        self.subspace.dim()
    }

    /// Exact test of `x ∈ V`.
    pub fn contains(&self, x: &[i64]) -> bool {
        self.exact.rank() == x.len() || self.exact.contains(&primitive(x))
    }

    /// `f_A` applied to the subspace coordinates of `x`.
    pub fn map(&self, x: &[i64]) -> Result<Vec<f64>, TransformError> {
        let xf: Vec<f64> = x.iter().map(|&c| c as f64).collect();
        radial_map(&self.transform, &self.subspace.coords(&xf))
    }

    /// Images of all members, in member order.
    pub fn mapped_members(&self, source: &PointSet) -> Result<Vec<Vec<f64>>, TransformError> {
        self.members.iter().map(|&i| self.map(source.point(i))).collect()
    }

    pub fn to_record(&self) -> PieceRecord {
        let b = self.subspace.basis();
        PieceRecord {
            subspace_basis: (0..b.cols()).map(|j| b.col(j)).collect(),
            generators: self.generators.clone(),
            transform: self.transform.to_rows(),
            weights: self.weights.c_sq.clone(),
            solver: self.weights.method,
            members: self.members.clone(),
            certificate: self.certificate,
        }
    }

    pub fn from_record(rec: PieceRecord) -> Result<Self, TransformError> {
        let ambient = rec.subspace_basis.first().map(Vec::len).ok_or(TransformError::Malformed("empty basis".into()))?;
        let basis = Matrix::from_columns(&rec.subspace_basis, ambient).map_err(|_| TransformError::Malformed("ragged basis".into()))?;
        let subspace = Subspace::from_orthonormal(basis).map_err(|e| TransformError::Malformed(format!("basis: {e}")))?;
        let k = subspace.dim();
        let transform = Matrix::from_rows(&rec.transform).map_err(|_| TransformError::Malformed("ragged transform".into()))?;
        if transform.rows() != k || transform.cols() != k {
            return Err(TransformError::Malformed("transform shape does not match the subspace".into()));
        }
        if rec.generators.len() != k || rec.generators.iter().any(|g| g.len() != ambient) {
            return Err(TransformError::Malformed("generators do not match the subspace".into()));
        }
        let weights = ScalingWeights { c_sq: rec.weights, delta: rec.certificate.delta, method: rec.solver, unit_weights: Vec::new() };
        Ok(Self::new(rec.members, subspace, rec.generators, transform, weights, rec.certificate))
    }
}

/// Serialized form of a piece.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PieceRecord {
    pub subspace_basis: Vec<Vec<f64>>,
    pub generators: Vec<Vec<i64>>,
    pub transform: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub solver: ScalingMethod,
    pub members: Vec<usize>,
    pub certificate: Certificate,
}

/// Ordered pieces whose member sets partition the source indices.
#[derive(Clone, Debug)]
pub struct ForsterDecomposition {
    pub pieces: Vec<ForsterPiece>,
    pub source: PointSet,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionRecord {
    pub source_digest: String,
    pub n: usize,
    pub dim: usize,
    pub delta: f64,
    pub pieces: Vec<PieceRecord>,
}

impl ForsterDecomposition {
    pub fn to_record(&self, source_digest: &str, delta: f64) -> DecompositionRecord {
        DecompositionRecord {
            source_digest: source_digest.to_string(),
            n: self.source.len(),
            dim: self.source.dim(),
            delta,
            pieces: self.pieces.iter().map(ForsterPiece::to_record).collect(),
        }
    }

    /// Checks that member sets are disjoint and cover `0..n`.
    pub fn is_partition(&self) -> bool {
        let mut seen = vec![false; self.source.len()];
        for p in &self.pieces {
            for &i in &p.members {
                if i >= seen.len() || seen[i] {
                    return false;
                }
                seen[i] = true;
            }
        }
        seen.iter().all(|&s| s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CertificateReport {
    pub trace: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `‖M − I/k‖₂`.
    pub distance: f64,
    pub pass: bool,
}

/// Recomputes `M = (1/m)·Σ f_A(x) f_A(x)ᵀ` over the members and compares it
/// with `I/k`.
pub fn verify_piece(piece: &ForsterPiece, source: &PointSet) -> CertificateReport {
    let fail = CertificateReport { trace: f64::NAN, lambda_min: f64::NAN, lambda_max: f64::NAN, distance: f64::INFINITY, pass: false };
    let k = piece.dim();
    if piece.members.is_empty() || piece.members.iter().any(|&i| i >= source.len()) {
        return fail;
    }
    let Ok(mapped) = piece.mapped_members(source) else { return fail };
    let mut m = Matrix::zeros(k, k);
    let w = 1.0 / mapped.len() as f64;
    for f in &mapped {
        m.add_outer(f, w);
    }
    m.symmetrize();
    let Ok(eig) = sym_eigen(&m) else { return fail };
    let inv_k = 1.0 / k as f64;
    let distance = (eig.max() - inv_k).abs().max((eig.min() - inv_k).abs());
    let trace = m.trace();
    let pass = (trace - 1.0).abs() <= TRACE_TOL && distance <= piece.certificate.delta + EPS_NUM && mapped.iter().all(|f| (norm(f) - 1.0).abs() <= 1e-12);
    CertificateReport { trace, lambda_min: eig.min(), lambda_max: eig.max(), distance, pass }
}
