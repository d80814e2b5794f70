use crate::scalar::Real;

use super::exact::ExactSpan;
use super::matrix::{dot, norm};
use super::{LinalgError, Matrix, JACOBI_SWEEPS};

/// Relative singular-value threshold used for floating point rank decisions.
pub const RANK_TOL: f64 = 1e-9;

/// Linear subspace given by a column-orthonormal basis (ambient_dim × dim).
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace<T> {
    basis: Matrix<T>,
}

impl<T: Real> Subspace<T> {
    /// Wraps a column-orthonormal basis, checking `BᵀB = I` within 1e−10.
    pub fn from_orthonormal(basis: Matrix<T>) -> Result<Self, LinalgError> {
        if basis.cols() == 0 || basis.cols() > basis.rows() {
            return Err(LinalgError::DimensionMismatch);
        }
        let gram = basis.transpose().matmul(&basis)?;
        let err = gram.sub(&Matrix::identity(basis.cols()))?.max_abs();
        if !(err <= T::lit(1e-10).max(T::epsilon() * T::lit(64.0))) {
            return Err(LinalgError::NotOrthonormal);
        }
        Ok(Self { basis })
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self { basis: Matrix::identity(ambient_dim) }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &Matrix<T> {
        &self.basis
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim()
    }

    /// Coordinates of `x` in the subspace basis (`Bᵀx`).
    pub fn coords(&self, x: &[T]) -> Vec<T> {
        self.basis.tr_mul_vec(x).expect("ambient dimension")
    }

    /// Ambient vector for subspace coordinates (`B c`).
    pub fn embed(&self, c: &[T]) -> Vec<T> {
        self.basis.mul_vec(c).expect("subspace dimension")
    }

    /// Distance from `x` to the subspace relative to ‖x‖.
    pub fn relative_residual(&self, x: &[T]) -> T {
        let nx = norm(x);
        if nx == T::zero() {
            return T::zero();
        }
        let p = self.embed(&self.coords(x));
        let r: Vec<T> = x.iter().zip(&p).map(|(&a, &b)| a - b).collect();
        norm(&r) / nx
    }
}

/// Singular values (descending) and right singular vectors (columns) of `a`,
/// by one-sided Jacobi.
pub fn right_svd<T: Real>(a: &Matrix<T>) -> Result<(Vec<T>, Matrix<T>), LinalgError> {
    let n = a.cols();
    let m = a.rows();
    let mut cols: Vec<Vec<T>> = (0..n).map(|j| a.col(j)).collect();
    let mut v = Matrix::identity(n);
    let eps = T::epsilon();
    let total: T = cols.iter().map(|c| dot(c, c)).sum();
    // Columns this small are numerically zero; rotating them never settles.
    let negligible = eps * eps * total;
    // Rounding leaves |γ| at a few ulps of √(αβ) scaled by the column length.
    let tol = eps * T::lit(m.max(4) as f64);
    let mut sweep = 0;
    loop {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == T::zero() || alpha <= negligible || beta <= negligible || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let x = cols[p][i];
                    let y = cols[q][i];
                    cols[p][i] = c * x - s * y;
                    cols[q][i] = s * x + c * y;
                }
                for i in 0..n {
                    let x = v[(i, p)];
                    let y = v[(i, q)];
                    v[(i, p)] = c * x - s * y;
                    v[(i, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
        sweep += 1;
        if sweep == JACOBI_SWEEPS {
            return Err(LinalgError::NonConvergent);
        }
    }
    let sig: Vec<T> = cols.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sig[j].partial_cmp(&sig[i]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| sig[i]).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((values, vectors))
}

/// Linear span of real points; rank decided at `RANK_TOL × σ_max` on the
/// unit-normalized point set.
pub fn span_of<T: Real>(points: &[Vec<T>]) -> Result<Subspace<T>, LinalgError> {
    let d = points.first().map(Vec::len).ok_or(LinalgError::EmptyInput)?;
    let rows: Vec<Vec<T>> = points
        .iter()
        .filter_map(|p| {
            let n = norm(p);
            (n > T::zero()).then(|| p.iter().map(|&a| a / n).collect())
        })
        .collect();
    if rows.is_empty() {
        return Err(LinalgError::EmptyInput);
    }
    let a = Matrix::from_rows(&rows)?;
    if a.cols() != d {
        return Err(LinalgError::DimensionMismatch);
    }
    let (sig, v) = right_svd(&a)?;
    let tol = T::lit(RANK_TOL) * sig[0];
    let rank = sig.iter().filter(|&&s| s > tol).count().max(1);
    Subspace::from_orthonormal(Matrix::from_fn(d, rank, |i, j| v[(i, j)]))
}

/// Orthonormalizes linearly independent vectors (modified Gram–Schmidt, two passes).
pub fn orthonormalize<T: Real>(vectors: &[Vec<T>]) -> Result<Subspace<T>, LinalgError> {
    let d = vectors.first().map(Vec::len).ok_or(LinalgError::EmptyInput)?;
    let mut q: Vec<Vec<T>> = Vec::with_capacity(vectors.len());
    for x in vectors {
        let nx = norm(x);
        let mut r: Vec<T> = x.iter().map(|&a| a / nx).collect();
        for _ in 0..2 {
            for c in &q {
                let dd = dot(c, &r);
                r.iter_mut().zip(c).for_each(|(ri, &ci)| *ri -= dd * ci);
            }
        }
        let nr = norm(&r);
        if !(nr > T::zero()) {
            return Err(LinalgError::RankDeficient);
        }
        r.iter_mut().for_each(|a| *a /= nr);
        q.push(r);
    }
    Subspace::from_orthonormal(Matrix::from_columns(&q, d)?)
}

/// Exact span of integer points: independent generators chosen by exact
/// elimination, then orthonormalized in floating point.
pub fn span_of_integer(dim: usize, points: &[&[i64]]) -> Result<(Subspace<f64>, ExactSpan), LinalgError> {
    let mut exact = ExactSpan::new(dim);
    let mut gens: Vec<Vec<f64>> = Vec::new();
    for p in points {
        if exact.insert(p) {
            gens.push(p.iter().map(|&a| a as f64).collect());
        }
    }
    if gens.is_empty() {
        return Err(LinalgError::EmptyInput);
    }
    Ok((orthonormalize(&gens)?, exact))
}
