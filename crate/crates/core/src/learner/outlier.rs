use crate::linalg::{sym_eigen, Matrix};

use super::LearnerError;

/// Smallest `Γ` such that no vector is a `Γ`-outlier of the empirical
/// distribution: `max_x sqrt(xᵀΣ⁻¹x)` with `Σ = (1/m)·Σ y yᵀ`.
pub fn outlier_bound(vectors: &[Vec<f64>]) -> Result<f64, LearnerError> {
    let k = vectors.first().map(Vec::len).ok_or(LearnerError::DegenerateSecondMoment)?;
    let mut sigma = Matrix::zeros(k, k);
    let w = 1.0 / vectors.len() as f64;
    for v in vectors {
        sigma.add_outer(v, w);
    }
    sigma.symmetrize();
    let eig = sym_eigen(&sigma).map_err(|_| LearnerError::DegenerateSecondMoment)?;
    if !(eig.min() > 1e-12 * eig.max()) {
        return Err(LearnerError::DegenerateSecondMoment);
    }
    let mut worst: f64 = 0.0;
    for v in vectors {
        let q: f64 = (0..k)
            .map(|j| {
                let p: f64 = (0..k).map(|i| eig.vectors[(i, j)] * v[i]).sum();
                p * p / eig.values[j]
            })
            .sum();
        worst = worst.max(q);
    }
    Ok(worst.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axes() {
        let g = outlier_bound(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((g - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn attained_at_the_lonely_axis() {
        let g = outlier_bound(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![10.0, 0.0]]).unwrap();
        assert!((g - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn single_point() {
        assert!((outlier_bound(&[vec![-4.0]]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate() {
        assert_eq!(outlier_bound(&[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap_err(), LearnerError::DegenerateSecondMoment);
        assert_eq!(outlier_bound(&[]).unwrap_err(), LearnerError::DegenerateSecondMoment);
    }
}
