use crate::dataset::PointSet;
use crate::linalg::sym_eigen;
use crate::{Eigen, Mat, Space};

use super::{check_weights, second_moment, Problem, ScalingError, ViolatedConstraint};

/// Relative PSD slack of the final certificate: `λ_min ≥ −CERT_TOL·tr(Σ_c)`.
pub const CERT_TOL: f64 = 1e-9;

/// Slack as a fraction of `λ_min(Σ_c)` used before weights are emitted. A
/// trace-relative slack alone can be met on infeasible inputs by letting the
/// weight ratios grow without bound.
pub(crate) fn emit_tau(eig: &Eigen) -> f64 {
    CERT_TOL * eig.min().max(0.0)
}

/// `own·uᵀ((k+δ)Σ + τI)⁻¹u` for every item. A value ≤ 1 is equivalent to
/// `λ_min((k+δ)Σ − own·u uᵀ) ≥ −τ`.
pub(crate) fn loads(eig: &Eigen, units: &[Vec<f64>], own: &[f64], kd: f64, tau: f64) -> Vec<f64> {
    let k = eig.values.len();
    let denom: Vec<f64> = eig.values.iter().map(|&l| kd * l + tau).collect();
    units
        .iter()
        .zip(own)
        .map(|(u, &a)| {
            let mut acc = 0.0;
            for j in 0..k {
                let q: f64 = (0..k).map(|i| eig.vectors[(i, j)] * u[i]).sum();
                let q2 = q * q;
                if denom[j] > 0.0 {
                    acc += q2 / denom[j];
                } else if q2 > 0.0 {
                    return f64::INFINITY;
                }
            }
            a * acc
        })
        .collect()
}

/// Smallest eigenvalue and its eigenvector of `(k+δ)Σ − own·u uᵀ`.
pub(crate) fn min_eigpair(sigma: &Mat, u: &[f64], own: f64, kd: f64) -> Result<(f64, Vec<f64>), ScalingError> {
    let mut m = sigma.scale(kd);
    m.add_outer(u, -own);
    m.symmetrize();
    let e = sym_eigen(&m)?;
    let mut v = e.min_vector();
    if let Some(first) = v.iter().copied().find(|c| c.abs() > 1e-12) {
        if first < 0.0 {
            v.iter_mut().for_each(|c| *c = -*c);
        }
    }
    Ok((e.min(), v))
}

/// Item with the most negative `λ_min` below `−tau` (first index on ties).
pub(crate) fn worst_violation(
    sigma: &Mat,
    eig: &Eigen,
    units: &[Vec<f64>],
    own: &[f64],
    kd: f64,
    tau: f64,
) -> Result<Option<(usize, f64, Vec<f64>)>, ScalingError> {
    let ld = loads(eig, units, own, kd, tau);
    let mut best: Option<(usize, f64, Vec<f64>)> = None;
    for (i, &l) in ld.iter().enumerate() {
        if l <= 1.0 {
            continue;
        }
        let (lam, v) = min_eigpair(sigma, &units[i], own[i], kd)?;
        if lam < -tau && best.as_ref().map_or(true, |b| lam < b.1) {
            best = Some((i, lam, v));
        }
    }
    Ok(best)
}

/// Checks every point's constraint at slack `τ_psd = δ/(10k)·tr(Σ_c)` and
/// returns the most violated one.
pub fn separation_oracle(points: &PointSet, space: &Space, c_sq: &[f64], delta: f64) -> Result<Option<ViolatedConstraint>, ScalingError> {
    let prob = Problem::new(points, space)?;
    check_weights(&prob, c_sq)?;
    let k = prob.k as f64;
    // Work on a common scale so that huge coordinates do not overflow.
    let own = prob.unit_weights(c_sq);
    let top = own.iter().copied().fold(0.0, f64::max);
    let own_n: Vec<f64> = own.iter().map(|a| a / top).collect();
    let sigma = second_moment(&prob.units, &own_n, prob.n as f64, prob.k);
    let eig = sym_eigen(&sigma)?;
    let tau = delta / (10.0 * k) * sigma.trace();
    let found = worst_violation(&sigma, &eig, &prob.units, &own_n, k + delta, tau)?;
    Ok(found.map(|(i, lam, v)| ViolatedConstraint {
        point_index: i,
        witness: prob.embed(&v),
        // Undo the common rescaling and the unit normalization of the point.
        violation_gap: -lam * top,
    }))
}

/// Independent re-check of the weights: `λ_min((k+δ)Σ_c − c²(x)·x xᵀ) ≥ −CERT_TOL·tr(Σ_c)` for all x.
pub fn certify(points: &PointSet, space: &Space, c_sq: &[f64], delta: f64) -> Result<bool, ScalingError> {
    let prob = Problem::new(points, space)?;
    check_weights(&prob, c_sq)?;
    certify_problem(&prob, &prob.unit_weights(c_sq), delta, false)
}

/// Re-check in the stricter form the solvers require before emitting weights:
/// slack `CERT_TOL·λ_min(Σ_c)` instead of `CERT_TOL·tr(Σ_c)`.
pub fn certify_strict(points: &PointSet, space: &Space, c_sq: &[f64], delta: f64) -> Result<bool, ScalingError> {
    let prob = Problem::new(points, space)?;
    check_weights(&prob, c_sq)?;
    certify_problem(&prob, &prob.unit_weights(c_sq), delta, true)
}

pub(crate) fn certify_problem(prob: &Problem, own: &[f64], delta: f64, strict: bool) -> Result<bool, ScalingError> {
    let top = own.iter().copied().fold(0.0, f64::max);
    let own_n: Vec<f64> = own.iter().map(|a| a / top).collect();
    let sigma = second_moment(&prob.units, &own_n, prob.n as f64, prob.k);
    let eig = sym_eigen(&sigma)?;
    let tau = if strict { emit_tau(&eig) } else { CERT_TOL * sigma.trace() };
    Ok(loads(&eig, &prob.units, &own_n, prob.k as f64 + delta, tau).iter().all(|&l| l <= 1.0))
}

/// `min_x λ_min((k+δ)Σ_c − c²(x)·x xᵀ) / tr(Σ_c)` by a full eigendecomposition
/// per point. Slow; meant for audits.
pub fn certify_margin(points: &PointSet, space: &Space, c_sq: &[f64], delta: f64) -> Result<f64, ScalingError> {
    let prob = Problem::new(points, space)?;
    check_weights(&prob, c_sq)?;
    let own = prob.unit_weights(c_sq);
    let top = own.iter().copied().fold(0.0, f64::max);
    let own_n: Vec<f64> = own.iter().map(|a| a / top).collect();
    let sigma = second_moment(&prob.units, &own_n, prob.n as f64, prob.k);
    let tr = sigma.trace();
    let kd = prob.k as f64 + delta;
    let mut worst = f64::INFINITY;
    for (u, &a) in prob.units.iter().zip(&own_n) {
        let (lam, _) = min_eigpair(&sigma, u, a, kd)?;
        worst = worst.min(lam / tr);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::super::tests::ps;
    use super::*;

    #[test]
    fn uniform_weights_violate_at_diagonal() {
        let s = ps(&[&[1, 0], &[0, 1], &[1, 1], &[1, -1]]);
        let v = separation_oracle(&s, &Space::full(2), &[1.0; 4], 0.0).unwrap().unwrap();
        assert_eq!(v.point_index, 2);
        assert!((v.violation_gap - 0.5).abs() < 1e-12, "{}", v.violation_gap);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v.witness[0] - h).abs() < 1e-12 && (v.witness[1] - h).abs() < 1e-12);
    }

    #[test]
    fn balanced_weights_pass() {
        let s = ps(&[&[1, 0], &[0, 1], &[1, 1], &[1, -1]]);
        assert!(separation_oracle(&s, &Space::full(2), &[2.0, 2.0, 1.0, 1.0], 0.01).unwrap().is_none());
        assert!(certify(&s, &Space::full(2), &[2.0, 2.0, 1.0, 1.0], 0.01).unwrap());
        // At δ = 0 the balanced weights are exactly tight.
        let m = certify_margin(&s, &Space::full(2), &[2.0, 2.0, 1.0, 1.0], 0.0).unwrap();
        assert!(m.abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_never_violates() {
        let s = ps(&[&[5]]);
        for c in [1.0, 3.0, 1e6] {
            assert!(separation_oracle(&s, &Space::full(1), &[c], 0.0).unwrap().is_none());
        }
    }

    #[test]
    fn rejects_bad_weights() {
        let s = ps(&[&[1, 0], &[0, 1]]);
        assert!(separation_oracle(&s, &Space::full(2), &[1.0], 0.0).is_err());
        assert!(separation_oracle(&s, &Space::full(2), &[1.0, -1.0], 0.0).is_err());
    }

    #[test]
    fn load_test_matches_eigenvalues() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let pts: Vec<Vec<i64>> = (0..6).map(|_| (0..3).map(|_| rng.gen_range(-9..=9)).collect()).collect();
            let Ok(s) = PointSet::new(3, pts) else { continue };
            if crate::linalg::exact::exact_rank(3, s.points()) < 3 {
                continue;
            }
            let c: Vec<f64> = (0..6).map(|_| rng.gen_range(1.0..5.0)).collect();
            let margin = certify_margin(&s, &Space::full(3), &c, 0.1).unwrap();
            let ok = certify(&s, &Space::full(3), &c, 0.1).unwrap();
            if margin.abs() > 1e-6 {
                assert_eq!(ok, margin >= 0.0, "margin {margin}");
            if ok {
                assert!(certify_strict(&s, &Space::full(3), &c, 0.1).unwrap() || margin < 1e-6);
            }
            }
        }
    }
}
