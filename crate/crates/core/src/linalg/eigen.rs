use crate::scalar::Real;

use super::{LinalgError, Matrix};

/// Maximum number of cyclic Jacobi sweeps.
pub const JACOBI_SWEEPS: usize = 100;

/// Eigendecomposition `M = Q diag(values) Qᵀ` of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymEigen<T> {
    /// Eigenvalues, sorted descending.
    pub values: Vec<T>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: Matrix<T>,
}

impl<T: Real> SymEigen<T> {
    pub fn min(&self) -> T {
        *self.values.last().expect("non-empty spectrum")
    }

    pub fn max(&self) -> T {
        self.values[0]
    }

    /// Eigenvector for the smallest eigenvalue.
    pub fn min_vector(&self) -> Vec<T> {
        self.vectors.col(self.values.len() - 1)
    }

    /// Rebuilds `Q f(diag) Qᵀ` for a spectral function `f`.
    pub fn map_spectrum(&self, f: impl Fn(T) -> T) -> Matrix<T> {
        let n = self.values.len();
        let mapped: Vec<T> = self.values.iter().map(|&l| f(l)).collect();
        let q = &self.vectors;
        Matrix::from_fn(n, n, |i, j| (0..n).map(|k| q[(i, k)] * mapped[k] * q[(j, k)]).sum())
    }
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
///
/// Deterministic: the rotation order is fixed (row-major over the strict upper
/// triangle), so identical inputs give bit-identical outputs.
pub fn sym_eigen<T: Real>(m: &Matrix<T>) -> Result<SymEigen<T>, LinalgError> {
    m.check_symmetric()?;
    let n = m.rows();
    let mut a = m.clone();
    a.symmetrize();
    let mut q = Matrix::identity(n);

    let frob = a.frobenius();
    let target = T::epsilon() * frob;
    let mut converged = n <= 1 || frob == T::zero();
    let mut sweep = 0;
    while !converged {
        if sweep == JACOBI_SWEEPS {
            return Err(LinalgError::NonConvergent);
        }
        sweep += 1;
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = a[(p, r)];
                if apr == T::zero() {
                    continue;
                }
                let app = a[(p, p)];
                let arr = a[(r, r)];
                // Skip rotations that cannot change the diagonal at working precision.
                if apr.abs() <= T::epsilon() * T::lit(1e-3) * (app.abs() + arr.abs()).max(T::min_positive_value()) {
                    a[(p, r)] = T::zero();
                    a[(r, p)] = T::zero();
                    continue;
                }
                let theta = (arr - app) / (T::lit(2.0) * apr);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akr = a[(k, r)];
                    a[(k, p)] = c * akp - s * akr;
                    a[(k, r)] = s * akp + c * akr;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let ark = a[(r, k)];
                    a[(p, k)] = c * apk - s * ark;
                    a[(r, k)] = s * apk + c * ark;
                }
                a[(p, r)] = T::zero();
                a[(r, p)] = T::zero();
                for k in 0..n {
                    let qkp = q[(k, p)];
                    let qkr = q[(k, r)];
                    q[(k, p)] = c * qkp - s * qkr;
                    q[(k, r)] = s * qkp + c * qkr;
                }
            }
        }
        let mut off = T::zero();
        for p in 0..n {
            for r in (p + 1)..n {
                off += a[(p, r)] * a[(p, r)];
            }
        }
        converged = off.sqrt() <= target;
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps equal eigenvalues in Jacobi order.
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| q[(i, order[j])]);
    Ok(SymEigen { values, vectors })
}

/// Returns `B = M^{-1/2}`; fails when the smallest eigenvalue is below `floor`.
pub fn inv_sqrt_psd<T: Real>(m: &Matrix<T>, floor: T) -> Result<Matrix<T>, LinalgError> {
    let eig = sym_eigen(m)?;
    let min = eig.min();
    if !(min >= floor) {
        return Err(LinalgError::NotPositiveDefinite { min_eigenvalue: min.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(eig.map_spectrum(|l| T::one() / l.sqrt()))
}

/// Spectral norm of a symmetric matrix (largest absolute eigenvalue).
pub fn spectral_norm_sym<T: Real>(m: &Matrix<T>) -> Result<T, LinalgError> {
    let eig = sym_eigen(m)?;
    Ok(eig.max().abs().max(eig.min().abs()))
}

/// Spectral norm (largest singular value) of an arbitrary matrix.
pub fn spectral_norm<T: Real>(m: &Matrix<T>) -> Result<T, LinalgError> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(T::zero());
    }
    let mut gram = m.transpose().matmul(m)?;
    gram.symmetrize();
    let eig = sym_eigen(&gram)?;
    Ok(eig.max().max(T::zero()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> Matrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let mt = m.transpose();
        m = m.add(&mt).unwrap();
        m
    }

    #[test]
    fn diagonal_case() {
        let e = sym_eigen(&Matrix::from_diag(&[1.0f64, 3.0])).unwrap();
        assert_eq!(e.values, vec![3.0, 1.0]);
        assert_abs_diff_eq!(e.vectors[(1, 0)].abs(), 1.0);
        assert_abs_diff_eq!(e.vectors[(0, 1)].abs(), 1.0);
    }

    #[test]
    fn swap_matrix() {
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = sym_eigen(&m).unwrap();
        assert_abs_diff_eq!(e.values[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.values[1], -1.0, epsilon = 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0: Vec<f64> = e.vectors.col(0);
        let v1: Vec<f64> = e.vectors.col(1);
        assert_abs_diff_eq!((v0[0] * v0[1]).abs(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(v0[0] * v0[1], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(v1[0] * v1[1], -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(v0[0].abs(), h, epsilon = 1e-15);
    }

    #[test]
    fn random_reconstruction() {
        for seed in 0..20 {
            let m = random_symmetric(5, seed);
            let e = sym_eigen(&m).unwrap();
            let rec = e.map_spectrum(|l| l);
            let err = rec.sub(&m).unwrap().frobenius() / m.frobenius();
            assert!(err <= 1e-9, "reconstruction error {err}");
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
            let qtq = e.vectors.transpose().matmul(&e.vectors).unwrap();
            let orth = spectral_norm_sym(&qtq.sub(&Matrix::identity(5)).unwrap()).unwrap();
            assert!(orth <= 1e-9);
        }
    }

    #[test]
    fn works_in_f32() {
        let m: Matrix<f32> = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = sym_eigen(&m).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-5);
        assert!((e.values[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn nonsymmetric_rejected() {
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(sym_eigen(&m).unwrap_err(), LinalgError::NonSymmetric);
    }

    #[test]
    fn inv_sqrt_examples() {
        let b = inv_sqrt_psd(&Matrix::<f64>::identity(3), 1e-12).unwrap();
        assert!(b.sub(&Matrix::identity(3)).unwrap().max_abs() < 1e-15);
        let b = inv_sqrt_psd(&Matrix::from_diag(&[4.0, 9.0]), 1e-12).unwrap();
        assert_abs_diff_eq!(b[(0, 0)], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(b[(1, 1)], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b[(0, 1)], 0.0, epsilon = 1e-15);
        let err = inv_sqrt_psd(&Matrix::from_diag(&[1.0, -1.0]), 1e-12).unwrap_err();
        assert!(matches!(err, LinalgError::NotPositiveDefinite { .. }));
    }

    #[test]
    fn inv_sqrt_random_psd() {
        for seed in 0..10 {
            let e = sym_eigen(&random_symmetric(6, 100 + seed)).unwrap();
            let q = e.vectors;
            let d = Matrix::from_diag(&[0.5, 1.0, 2.0, 3.0, 4.5, 7.0]);
            let m = q.matmul(&d).unwrap().matmul(&q.transpose()).unwrap();
            let mut m = m;
            m.symmetrize();
            let b = inv_sqrt_psd(&m, 1e-12).unwrap();
            let bmb = b.matmul(&m).unwrap().matmul(&b).unwrap();
            assert!(bmb.sub(&Matrix::identity(6)).unwrap().max_abs() <= 1e-8);
        }
    }
}
