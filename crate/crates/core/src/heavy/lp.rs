//! Cutting-plane solution of the heavy-subspace LP.
//!
//! Variables `v ∈ [0,1]` (one per distinct direction, weighted by its point
//! count). The LP asks for `Σ wᵢvᵢ ≥ (N/k)·Σ_{i∈B} vᵢ + 1` for every basis `B`;
//! the binding basis for a candidate is the greedy maximum-weight basis, so
//! the LP is solved by Kelley's method: maximize `t` subject to one cut
//! `t ≤ Σ wᵢvᵢ − (N/k)·Σ_B vᵢ` per basis returned by the oracle so far.

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};

use super::directions::Directions;
use super::greedy::{greedy_independent, greedy_order};
use super::{HeavyError, HeavySubspaceResult, WeightVector};
use crate::dataset::PointSet;
use crate::Space;

/// Inputs with at most this many distinct directions use the LP route.
pub const LP_DIRECTION_LIMIT: usize = 24;

/// Weighted ground set seen by the LP.
struct Ground<'a> {
    vecs: Vec<&'a [i64]>,
    weight: Vec<usize>,
    dim: usize,
    rank: usize,
}

impl Ground<'_> {
    fn total(&self) -> f64 {
        self.weight.iter().sum::<usize>() as f64
    }

    fn oracle(&self, v: &[f64]) -> (f64, Vec<usize>) {
        let basis = greedy_independent(self.dim, &greedy_order(v), |i| self.vecs[i]);
        let lhs: f64 = self.weight.iter().zip(v).map(|(&w, &x)| w as f64 * x).sum();
        let rhs: f64 = basis.iter().map(|&i| v[i]).sum::<f64>() * self.total() / self.rank as f64;
        (lhs - rhs, basis)
    }

    fn budget(&self) -> usize {
        let m = self.vecs.len() as f64;
        (16.0 * m * m * (self.rank as f64 + m.ln().max(1.0))).ceil() as usize
    }

    /// Feasible `v`, or `None` when the LP optimum is provably below 1.
    fn solve(&self) -> Result<Option<Vec<f64>>, HeavyError> {
        let m = self.vecs.len();
        let total = self.total();
        let mut problem = Problem::new(OptimizationDirection::Maximize);
        let vars: Vec<Variable> = (0..m).map(|_| problem.add_var(0.0, (0.0, 1.0))).collect();
        let t = problem.add_var(1.0, (-total - 1.0, total + 1.0));
        let mut sol = problem.solve().map_err(|e| HeavyError::Lp(e.to_string()))?;
        // Flat values Σw − (N/k)r are multiples of 1/k, so an upper bound
        // below 1 − 1/(4N) rules out every flat reaching 1.
        let stop_below = 1.0 - 1.0 / (4.0 * total);
        for _ in 0..self.budget() {
            let v: Vec<f64> = vars.iter().map(|&x| sol[x].clamp(0.0, 1.0)).collect();
            let (phi, basis) = self.oracle(&v);
            if phi >= 1.0 - 1e-9 {
                return Ok(Some(v));
            }
            if sol[t] < stop_below {
                return Ok(None);
            }
            let scale = total / self.rank as f64;
            let mut coef: Vec<f64> = self.weight.iter().map(|&w| -(w as f64)).collect();
            basis.iter().for_each(|&i| coef[i] += scale);
            let mut expr: Vec<(Variable, f64)> = vars.iter().zip(&coef).filter(|(_, &c)| c != 0.0).map(|(&x, &c)| (x, c)).collect();
            expr.push((t, 1.0));
            sol = sol.add_constraint(expr, ComparisonOp::Le, 0.0).map_err(|e| HeavyError::Lp(e.to_string()))?;
        }
        Err(HeavyError::IterationBudgetExceeded(self.budget()))
    }

    /// Greedy basis over `v` sorted descending; returns the first `κ` basis
    /// elements for the smallest `κ` with `i_{κ+1} > (N/k)κ + 1`, where
    /// positions count points with multiplicity.
    fn extract(&self, v: &[f64]) -> Option<Vec<usize>> {
        let order = greedy_order(v);
        let mut start = vec![0usize; self.vecs.len()];
        let mut pos = 1;
        for &i in &order {
            start[i] = pos;
            pos += self.weight[i];
        }
        let picked = greedy_independent(self.dim, &order, |i| self.vecs[i]);
        let ratio = self.total() / self.rank as f64;
        (1..self.rank)
            .find(|&kappa| start[picked[kappa]] as f64 > ratio * kappa as f64 + 1.0)
            .map(|kappa| picked[..kappa].to_vec())
    }
}

/// Whether the heavy-subspace LP (with the point set taken as given) is
/// feasible; the returned weights have one entry per point.
pub fn lp_feasible(points: &PointSet, space: &Space) -> Result<Option<WeightVector>, HeavyError> {
    let dirs = Directions::new(points);
    if dirs.rank() != space.dim() {
        return Err(if dirs.rank() < space.dim() { HeavyError::RankDeficient } else { HeavyError::NotInSubspace });
    }
    let ground = Ground {
        vecs: (0..dirs.len()).map(|d| dirs.vec(d)).collect(),
        weight: (0..dirs.len()).map(|d| dirs.mult(d)).collect(),
        dim: dirs.dim(),
        rank: dirs.rank(),
    };
    Ok(ground.solve()?.map(|vd| {
        let mut v = vec![0.0; points.len()];
        for (d, &x) in vd.iter().enumerate() {
            dirs.members(d).iter().for_each(|&i| v[i] = x);
        }
        WeightVector(v)
    }))
}

/// Heavy subspace read off a feasible LP point.
pub fn extract_subspace(points: &PointSet, space: &Space, v: &WeightVector) -> Result<HeavySubspaceResult, HeavyError> {
    if v.0.len() != points.len() {
        return Err(HeavyError::WeightLength { expected: points.len(), found: v.0.len() });
    }
    let ground = Ground {
        vecs: points.points().iter().map(Vec::as_slice).collect(),
        weight: vec![1; points.len()],
        dim: points.dim(),
        rank: space.dim(),
    };
    let gens = ground
        .extract(&v.0)
        .ok_or_else(|| HeavyError::InternalInvariantViolated("no valid kappa for a feasible weight vector".into()))?;
    HeavySubspaceResult::from_generators(points, gens)
}

/// LP route: strict LP on the `k`-fold duplicated set, then the pair-swap
/// stage for subspaces meeting the bound with equality.
pub(super) fn find_by_lp(dirs: &Directions) -> Result<Option<Vec<usize>>, HeavyError> {
    let k = dirs.rank();
    let mut ground = Ground {
        vecs: (0..dirs.len()).map(|d| dirs.vec(d)).collect(),
        weight: (0..dirs.len()).map(|d| dirs.mult(d) * k).collect(),
        dim: dirs.dim(),
        rank: k,
    };
    if let Some(v) = ground.solve()? {
        let gens = ground
            .extract(&v)
            .ok_or_else(|| HeavyError::InternalInvariantViolated("no valid kappa for a feasible weight vector".into()))?;
        return Ok(Some(gens));
    }
    let m = dirs.len();
    for s in 0..m {
        for t in 0..m {
            if s == t {
                continue;
            }
            ground.weight[s] += 1;
            ground.weight[t] -= 1;
            let res = ground.solve().map(|v| v.and_then(|v| ground.extract(&v)));
            ground.weight[s] -= 1;
            ground.weight[t] += 1;
            if let Some(gens) = res? {
                let (gens, span) = dirs.flat(gens);
                if dirs.is_heavy(&span) {
                    return Ok(Some(gens));
                }
            }
        }
    }
    Ok(None)
}
