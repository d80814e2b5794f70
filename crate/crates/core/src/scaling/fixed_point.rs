use crate::dataset::PointSet;
use crate::linalg::sym_eigen;
use crate::Space;

use super::oracle::{certify_problem, emit_tau, loads};
use super::{second_moment, Problem, ScalingError, ScalingMethod, ScalingWeights};

/// Iterates `c²_{t+1}(x) = 1/(xᵀΣ_t⁻¹x)` over distinct directions and returns
/// the first iterate that passes the certificate at relaxation `delta`.
///
/// `Ok(None)` means no certified iterate within `max_iters`, which is what
/// happens when a heavy subspace exists.
pub fn fixed_point_scaling(points: &PointSet, space: &Space, delta: f64, max_iters: usize) -> Result<Option<ScalingWeights>, ScalingError> {
    let prob = Problem::new(points, space)?;
    let k = prob.k;
    let n = prob.n as f64;
    let kd = k as f64 + delta;
    let mut g = vec![1.0; prob.groups()];
    for it in 0..max_iters {
        let total: f64 = g.iter().zip(&prob.group_mult).map(|(a, m)| a * m).sum();
        g.iter_mut().for_each(|a| *a *= n / total);
        let moment: Vec<f64> = g.iter().zip(&prob.group_mult).map(|(a, m)| a * m).collect();
        let sigma = second_moment(&prob.group_units, &moment, n, k);
        let eig = sym_eigen(&sigma)?;
        if !(eig.min() > 0.0) {
            return Ok(None);
        }
        let tau = emit_tau(&eig);
        let cert = loads(&eig, &prob.group_units, &g, kd, tau);
        if cert.iter().all(|&l| l <= 1.0) {
            let unit_weights = prob.expand(&g);
            if certify_problem(&prob, &unit_weights, delta, true)? {
                let c_sq = prob.point_weights(&g);
                return Ok(Some(ScalingWeights { c_sq, delta, method: ScalingMethod::FixedPoint { iterations: it }, unit_weights }));
            }
        }
        let ones = vec![1.0; g.len()];
        let quad = loads(&eig, &prob.group_units, &ones, 1.0, 0.0);
        for (a, q) in g.iter_mut().zip(&quad) {
            *a = 1.0 / q;
        }
        if g.iter().any(|a| !a.is_finite() || *a <= 0.0) {
            return Ok(None);
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::super::tests::ps;
    use super::*;

    #[test]
    fn symmetric_set_converges_fast() {
        let s = ps(&[&[1, 0], &[0, 1], &[1, 1], &[1, -1]]);
        let w = fixed_point_scaling(&s, &Space::full(2), 1e-3, 50).unwrap().unwrap();
        assert!(matches!(w.method, ScalingMethod::FixedPoint { iterations } if iterations < 50));
        for (c, want) in w.c_sq.iter().zip([2.0, 2.0, 1.0, 1.0]) {
            assert!((c / want - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn single_point_one_step() {
        let w = fixed_point_scaling(&ps(&[&[-4, 2]]), &crate::linalg::span_of(&[vec![-4.0, 2.0]]).unwrap(), 1e-3, 1).unwrap().unwrap();
        assert_eq!(w.c_sq, vec![1.0]);
    }

    #[test]
    fn heavy_input_never_certifies() {
        let s = ps(&[&[1, 0, 0], &[2, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert!(fixed_point_scaling(&s, &Space::full(3), 1e-3, 2000).unwrap().is_none());
    }

    #[test]
    fn duplicates_share_weights() {
        let s = ps(&[&[1, 0], &[1, 0], &[0, 1], &[0, 3], &[1, 1]]);
        let w = fixed_point_scaling(&s, &Space::full(2), 1e-3, 5000).unwrap().unwrap();
        assert_eq!(w.c_sq[0], w.c_sq[1]);
        assert!((w.c_sq[2] / w.c_sq[3] - 9.0).abs() < 1e-9);
    }
}
