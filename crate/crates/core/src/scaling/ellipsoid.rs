use crate::dataset::PointSet;
use crate::linalg::{dot, sym_eigen, Matrix};
use crate::Space;

use super::oracle::{certify_problem, emit_tau, worst_violation};
use super::{log_weight_bound, second_moment, Problem, ScalingError, ScalingMethod, ScalingWeights, ViolatedConstraint};

/// The fallback is attempted only up to this many distinct directions.
pub const ELLIPSOID_MAX_VARS: usize = 64;
/// Starting radius cap; `P = R²I` stops being meaningful in binary64 beyond it.
pub const ELLIPSOID_RADIUS_CAP: f64 = 1e12;

/// Central-cut ellipsoid method over per-direction weights in the box
/// `[1, R]`, starting from the ball of radius `R` around the all-ones vector.
pub fn ellipsoid_scaling(points: &PointSet, space: &Space, delta: f64) -> Result<ScalingWeights, ScalingError> {
    let prob = Problem::new(points, space)?;
    solve(points, &prob, delta, 1.0)
}

pub(crate) fn solve(points: &PointSet, prob: &Problem, delta: f64, budget_factor: f64) -> Result<ScalingWeights, ScalingError> {
    let m = prob.groups();
    let n = prob.n as f64;
    let k = prob.k;
    let kd = k as f64 + delta;
    let radius = log_weight_bound(prob.n, points.bit_complexity(), k).exp().min(ELLIPSOID_RADIUS_CAP).max(2.0);
    // A solution, when one exists, leaves a box of volume (δ/2k)^m·n^{−m}.
    let stop_log_vol = m as f64 * ((delta / (2.0 * k as f64)).ln() - n.ln());
    let mf = m as f64;
    let shrink = if m > 1 { mf * (mf * mf / (mf * mf - 1.0)).ln() + (1.0 - 2.0 / (mf + 1.0)).ln() } else { (0.5f64).ln() };
    let budget = (((2.0 * mf * radius.ln() - 2.0 * stop_log_vol) / -shrink).ceil() * budget_factor) as usize + 1;

    let mut x = vec![1.0; m];
    let mut p = Matrix::<f64>::identity(m).scale(radius * radius);
    let mut log_det = 2.0 * mf * radius.ln();
    let mut last: Option<ViolatedConstraint> = None;
    for it in 0..budget {
        if 0.5 * log_det < stop_log_vol {
            break;
        }
        let mut a = vec![0.0; m];
        if let Some(i) = x.iter().position(|&v| v < 1.0) {
            a[i] = -1.0;
        } else if let Some(i) = x.iter().position(|&v| v > radius) {
            a[i] = 1.0;
        } else {
            let moment: Vec<f64> = x.iter().zip(&prob.group_mult).map(|(g, mu)| g * mu).collect();
            let sigma = second_moment(&prob.group_units, &moment, n, k);
            let eig = sym_eigen(&sigma)?;
            let tau = emit_tau(&eig);
            match worst_violation(&sigma, &eig, &prob.group_units, &x, kd, tau)? {
                None => {
                    let unit_weights = prob.expand(&x);
                    if certify_problem(prob, &unit_weights, delta, true)? {
                        let c_sq = prob.point_weights(&x);
                        return Ok(ScalingWeights { c_sq, delta, method: ScalingMethod::Ellipsoid { iterations: it }, unit_weights });
                    }
                    return Err(ScalingError::Infeasible { last });
                }
                Some((d, lam, w)) => {
                    let proj: Vec<f64> = prob.group_units.iter().map(|u| dot(&w, u).powi(2)).collect();
                    for e in 0..m {
                        a[e] = -kd / n * prob.group_mult[e] * proj[e];
                    }
                    a[d] += proj[d];
                    last = Some(ViolatedConstraint { point_index: prob.group_rep[d], witness: prob.embed(&w), violation_gap: -lam });
                }
            }
        }
        if m == 1 {
            // One variable: halve the interval toward the feasible side.
            let half = p[(0, 0)].sqrt() / 2.0;
            x[0] -= a[0].signum() * half;
            p[(0, 0)] = half * half;
            log_det += 2.0 * (0.5f64).ln();
            continue;
        }
        let pa = p.mul_vec(&a)?;
        let apa = dot(&a, &pa);
        if !(apa > 0.0) || !apa.is_finite() {
            break;
        }
        let b: Vec<f64> = pa.iter().map(|v| v / apa.sqrt()).collect();
        for (xi, bi) in x.iter_mut().zip(&b) {
            *xi -= bi / (mf + 1.0);
        }
        let c = mf * mf / (mf * mf - 1.0);
        let t = 2.0 / (mf + 1.0);
        for i in 0..m {
            for j in 0..m {
                p[(i, j)] = c * (p[(i, j)] - t * b[i] * b[j]);
            }
        }
        p.symmetrize();
        log_det += shrink;
    }
    Err(ScalingError::Infeasible { last })
}

#[cfg(test)]
mod tests {
    use super::super::certify;
    use super::super::tests::ps;
    use super::*;
    use crate::harness::brute_force_heavy_subspace;
    use rand::{Rng, SeedableRng};

    #[test]
    fn symmetric_set() {
        let s = ps(&[&[1, 0], &[0, 1], &[1, 1], &[1, -1]]);
        let w = ellipsoid_scaling(&s, &Space::full(2), 1e-3).unwrap();
        assert!(certify(&s, &Space::full(2), &w.c_sq, 1e-3).unwrap());
    }

    #[test]
    fn heavy_line_infeasible() {
        let s = ps(&[&[1, 0], &[1, 0], &[0, 1]]);
        assert!(matches!(ellipsoid_scaling(&s, &Space::full(2), 1e-3), Err(ScalingError::Infeasible { .. })));
    }

    #[test]
    fn certifies_small_instances_without_heavy_subspace() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 40 {
            let d = rng.gen_range(2..=3);
            let n = rng.gen_range(d + 1..=8);
            let pts: Vec<Vec<i64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-4..=4)).collect()).collect();
            let Ok(s) = PointSet::new(d, pts) else { continue };
            let full = Space::full(d);
            if crate::linalg::exact::exact_rank(d, s.points()) < d || brute_force_heavy_subspace(&s, &full).unwrap().found {
                continue;
            }
            let w = ellipsoid_scaling(&s, &full, 1e-2).unwrap_or_else(|e| panic!("{:?}: {e}", s.points()));
            assert!(certify(&s, &full, &w.c_sq, 1e-2).unwrap());
            checked += 1;
        }
    }
}
