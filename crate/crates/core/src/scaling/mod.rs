//! Scaling weights `c²(x)` with `c²(x)·x xᵀ ⪯ ((k+δ)/n)·Σ_y c²(y)·y yᵀ` for
//! every point, the relaxed radial-isotropy constraint behind a Forster
//! transform.
//!
//! Two solvers share one certificate: a fixed-point iteration (cheap, runs
//! first) and a central-cut ellipsoid method over the weights (fallback).
//! Weights are only emitted after [`certify`] accepts them.

mod ellipsoid;
mod fixed_point;
mod oracle;

use serde::{Deserialize, Serialize};

use crate::dataset::PointSet;
use crate::heavy::Directions;
use crate::linalg::{norm, LinalgError, Matrix};
use crate::{Mat, Space};

pub use ellipsoid::{ellipsoid_scaling, ELLIPSOID_MAX_VARS, ELLIPSOID_RADIUS_CAP};
pub use fixed_point::fixed_point_scaling;
pub use oracle::{certify, certify_margin, certify_strict, separation_oracle, CERT_TOL};

/// Default iteration budget of the fixed-point accelerator.
pub const FIXED_POINT_ITERS: usize = 5000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScalingError {
    #[error("no certified scaling found (a heavy subspace exists or the solver failed)")]
    Infeasible { last: Option<ViolatedConstraint> },
    #[error("points do not lie in the subspace")]
    NotInSubspace,
    #[error("empty point set")]
    Empty,
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingMethod {
    FixedPoint { iterations: usize },
    Ellipsoid { iterations: usize },
}

/// Certified weights, one per point, normalized so that the smallest is 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingWeights {
    pub c_sq: Vec<f64>,
    pub delta: f64,
    pub method: ScalingMethod,
    /// Weights of the unit-normalized points, `c²(x)·‖x‖²` up to a common
    /// factor. They do not depend on the points' magnitudes, so transforms
    /// built from them are bit-identical under power-of-two rescaling of
    /// individual points. Empty when read back from a record.
    pub unit_weights: Vec<f64>,
}

/// A point whose constraint fails at the candidate, with the eigenvector
/// (ambient coordinates, unit) of the most negative eigenvalue.
#[derive(Clone, Debug, PartialEq)]
pub struct ViolatedConstraint {
    pub point_index: usize,
    pub witness: Vec<f64>,
    pub violation_gap: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub fixed_point_iters: usize,
    /// Multiplier on the ellipsoid's default cut budget.
    pub ellipsoid_budget_factor: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { fixed_point_iters: FIXED_POINT_ITERS, ellipsoid_budget_factor: 1.0 }
    }
}

/// Natural log of the magnitude bound `R = n^{8bk}` on certified weights.
pub fn log_weight_bound(n: usize, bits: u32, k: usize) -> f64 {
    8.0 * bits as f64 * k as f64 * (n as f64).ln()
}

/// Points in subspace coordinates, grouped by direction.
pub(crate) struct Problem {
    pub k: usize,
    pub n: usize,
    /// Unit vectors in subspace coordinates, one per point.
    pub units: Vec<Vec<f64>>,
    pub norm_sq: Vec<f64>,
    /// Point index → direction group.
    pub group: Vec<usize>,
    pub group_units: Vec<Vec<f64>>,
    pub group_mult: Vec<f64>,
    pub group_rep: Vec<usize>,
    basis: Mat,
}

impl Problem {
    pub fn new(points: &PointSet, space: &Space) -> Result<Self, ScalingError> {
        if points.is_empty() {
            return Err(ScalingError::Empty);
        }
        if points.dim() != space.ambient_dim() {
            return Err(ScalingError::Linalg(LinalgError::DimensionMismatch));
        }
        let mut units: Vec<Vec<f64>> = Vec::with_capacity(points.len());
        let mut norm_sq = Vec::with_capacity(points.len());
        for p in points.points() {
            let x: Vec<f64> = p.iter().map(|&c| c as f64).collect();
            if space.relative_residual(&x) > 1e-6 {
                return Err(ScalingError::NotInSubspace);
            }
            let y = space.coords(&x);
            let ny = norm(&y);
            units.push(y.iter().map(|v| v / ny).collect());
            norm_sq.push(ny * ny);
        }
        let dirs = Directions::new(points);
        let mut group = vec![0; points.len()];
        let mut group_units = Vec::with_capacity(dirs.len());
        let mut group_mult = Vec::with_capacity(dirs.len());
        let mut group_rep = Vec::with_capacity(dirs.len());
        for d in 0..dirs.len() {
            for &i in dirs.members(d) {
                group[i] = d;
            }
            let rep = dirs.representative(d);
            group_units.push(units[rep].clone());
            group_mult.push(dirs.mult(d) as f64);
            group_rep.push(rep);
        }
        Ok(Self { k: space.dim(), n: points.len(), units, norm_sq, group, group_units, group_mult, group_rep, basis: space.basis().clone() })
    }

    pub fn groups(&self) -> usize {
        self.group_units.len()
    }

    /// Per-point weights from per-direction weights, smallest equal to 1.
    pub fn point_weights(&self, g: &[f64]) -> Vec<f64> {
        let raw: Vec<f64> = (0..self.n).map(|i| g[self.group[i]] / self.norm_sq[i]).collect();
        let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
        raw.iter().map(|c| c / min).collect()
    }

    /// Per-point weights of the unit vectors from per-direction weights.
    pub fn expand(&self, g: &[f64]) -> Vec<f64> {
        self.group.iter().map(|&d| g[d]).collect()
    }

    /// Weights of the unit vectors from per-point weights.
    pub fn unit_weights(&self, c_sq: &[f64]) -> Vec<f64> {
        c_sq.iter().zip(&self.norm_sq).map(|(c, s)| c * s).collect()
    }

    pub fn embed(&self, w: &[f64]) -> Vec<f64> {
        self.basis.mul_vec(w).expect("subspace coordinates")
    }
}

/// `(1/n)·Σ wᵢ uᵢ uᵢᵀ`.
pub(crate) fn second_moment(units: &[Vec<f64>], weights: &[f64], n: f64, k: usize) -> Mat {
    let mut s = Matrix::zeros(k, k);
    for (u, &w) in units.iter().zip(weights) {
        s.add_outer(u, w / n);
    }
    s.symmetrize();
    s
}

/// `Σ_c = (1/n)·Σ c²(x)·x xᵀ` in subspace coordinates.
pub fn weighted_second_moment(points: &PointSet, space: &Space, c_sq: &[f64]) -> Result<Mat, ScalingError> {
    let prob = Problem::new(points, space)?;
    check_weights(&prob, c_sq)?;
    Ok(second_moment(&prob.units, &prob.unit_weights(c_sq), prob.n as f64, prob.k))
}

pub(crate) fn check_weights(prob: &Problem, c_sq: &[f64]) -> Result<(), ScalingError> {
    if c_sq.len() != prob.n {
        return Err(ScalingError::InvalidWeights(format!("{} weights for {} points", c_sq.len(), prob.n)));
    }
    if c_sq.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
        return Err(ScalingError::InvalidWeights("weights must be positive and finite".into()));
    }
    Ok(())
}

/// `(1/n)·Σ wᵢ·uᵢuᵢᵀ` over the unit-normalized points, in subspace coordinates.
pub fn unit_second_moment(points: &PointSet, space: &Space, unit_weights: &[f64]) -> Result<Mat, ScalingError> {
    let prob = Problem::new(points, space)?;
    check_weights(&prob, unit_weights)?;
    Ok(second_moment(&prob.units, unit_weights, prob.n as f64, prob.k))
}

/// Fixed point first, ellipsoid fallback; the result always passes [`certify`].
pub fn solve_scaling_sdp(points: &PointSet, space: &Space, delta: f64) -> Result<ScalingWeights, ScalingError> {
    solve_scaling_with(points, space, delta, SolverOptions::default())
}

pub fn solve_scaling_with(points: &PointSet, space: &Space, delta: f64, opts: SolverOptions) -> Result<ScalingWeights, ScalingError> {
    if let Some(w) = fixed_point_scaling(points, space, delta, opts.fixed_point_iters)? {
        return Ok(w);
    }
    let prob = Problem::new(points, space)?;
    if prob.groups() <= ELLIPSOID_MAX_VARS {
        return ellipsoid::solve(points, &prob, delta, opts.ellipsoid_budget_factor);
    }
    // Too many distinct directions for the ellipsoid: report the violation
    // at uniform weights.
    let last = separation_oracle(points, space, &vec![1.0; points.len()], delta)?;
    Err(ScalingError::Infeasible { last })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(super) fn ps(pts: &[&[i64]]) -> PointSet {
        PointSet::new(pts[0].len(), pts.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn symmetric_four_points() {
        let s = ps(&[&[1, 0], &[0, 1], &[1, 1], &[1, -1]]);
        let w = solve_scaling_sdp(&s, &Space::full(2), 1e-3).unwrap();
        for (c, want) in w.c_sq.iter().zip([2.0, 2.0, 1.0, 1.0]) {
            assert!((c / want - 1.0).abs() < 0.01, "{:?}", w.c_sq);
        }
        assert!(certify(&s, &Space::full(2), &w.c_sq, 1e-3).unwrap());
    }

    #[test]
    fn single_point() {
        let s = ps(&[&[7]]);
        let w = solve_scaling_sdp(&s, &Space::full(1), 1e-3).unwrap();
        assert_eq!(w.c_sq, vec![1.0]);
    }

    #[test]
    fn heavy_line_is_infeasible() {
        let s = ps(&[&[1, 0], &[1, 0], &[0, 1]]);
        let err = solve_scaling_sdp(&s, &Space::full(2), 1e-3).unwrap_err();
        assert!(matches!(err, ScalingError::Infeasible { last: Some(_) }), "{err:?}");
    }

    #[test]
    fn weights_normalized_and_bounded() {
        let s = ps(&[&[3, 1, 0], &[0, 2, 5], &[1, -1, 1], &[4, 0, -3], &[-2, 7, 1]]);
        let w = solve_scaling_sdp(&s, &Space::full(3), 1e-3).unwrap();
        let min = w.c_sq.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(min, 1.0);
        let max = w.c_sq.iter().copied().fold(0.0, f64::max);
        assert!(max.ln() <= log_weight_bound(s.len(), s.bit_complexity(), 3));
    }

    #[test]
    fn scale_equivariance() {
        let s = ps(&[&[3, 1], &[1, 2], &[-1, 4], &[5, -2]]);
        let s2 = PointSet::new(2, s.points().iter().map(|p| p.iter().map(|c| 2 * c).collect()).collect()).unwrap();
        let full = Space::full(2);
        let a = solve_scaling_sdp(&s, &full, 1e-3).unwrap();
        let b = solve_scaling_sdp(&s2, &full, 1e-3).unwrap();
        for (x, y) in a.c_sq.iter().zip(&b.c_sq) {
            assert!((x / y - 1.0).abs() < 1e-9);
        }
        assert!(certify(&s2, &full, &b.c_sq, 1e-3).unwrap());
        // The moment matrix grows by 4, so its inverse square root halves.
        let ma = weighted_second_moment(&s, &full, &a.c_sq).unwrap();
        let mb = weighted_second_moment(&s2, &full, &a.c_sq).unwrap();
        assert!(mb.sub(&ma.scale(4.0)).unwrap().max_abs() <= 1e-9 * mb.max_abs());
    }
}
