use crate::dataset::PointSet;
use crate::linalg::exact::HybridSpan;
use crate::Space;

use super::{HeavyError, WeightVector};

/// Greedy order: weight descending, ties by smaller index.
pub(crate) fn greedy_order(w: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    order
}

/// Scans `order`, keeping each vector independent of those kept before it.
pub(crate) fn greedy_independent<'a>(dim: usize, order: &[usize], vec_of: impl Fn(usize) -> &'a [i64]) -> Vec<usize> {
    let mut span = HybridSpan::new(dim);
    let mut picked = Vec::new();
    for &i in order {
        if span.insert(vec_of(i)) {
            picked.push(i);
        }
    }
    picked
}

/// Maximum-weight basis of `V` among the points (0-based indices, ascending).
///
/// Points are scanned by weight descending with ties broken by smaller index;
/// each point dependent on the already chosen ones is skipped.
pub fn max_weight_basis(points: &PointSet, space: &Space, v: &WeightVector) -> Result<Vec<usize>, HeavyError> {
    if v.0.len() != points.len() {
        return Err(HeavyError::WeightLength { expected: points.len(), found: v.0.len() });
    }
    let order = greedy_order(&v.0);
    let mut basis = greedy_independent(points.dim(), &order, |i| points.point(i));
    if basis.len() != space.dim() {
        return Err(if basis.len() < space.dim() { HeavyError::RankDeficient } else { HeavyError::NotInSubspace });
    }
    basis.sort_unstable();
    Ok(basis)
}
