//! Heavy subspaces: a proper subspace `W ⊂ V` holding at least a
//! `dim(W)/dim(V)` fraction of the points.
//!
//! Small inputs (few distinct directions) go through the cutting-plane LP with
//! the greedy basis oracle, followed by the pair-swap stage for the equality
//! case. Larger inputs use an exact base-packing test: `k` copies of every
//! point can be split into `n` bases exactly when no flat is strictly heavy,
//! and a flat meets the bound with equality exactly when the exchange graph of
//! such a packing is not strongly connected.

mod directions;
mod greedy;
mod lp;
mod partition;

pub use directions::Directions;
pub use greedy::max_weight_basis;
pub use lp::{extract_subspace, lp_feasible, LP_DIRECTION_LIMIT};

use crate::dataset::PointSet;
use crate::linalg::exact::ExactSpan;
use crate::linalg::{span_of_integer, LinalgError};
use crate::Space;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HeavyError {
    #[error("points do not span the subspace")]
    RankDeficient,
    #[error("points do not lie in the subspace")]
    NotInSubspace,
    #[error("cutting-plane budget of {0} cuts exceeded")]
    IterationBudgetExceeded(usize),
    #[error("internal invariant violated: {0}")]
    InternalInvariantViolated(String),
    #[error("weight vector has {found} entries, expected {expected}")]
    WeightLength { expected: usize, found: usize },
    #[error("lp solver: {0}")]
    Lp(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// LP variables, one per point, in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector(pub Vec<f64>);

impl WeightVector {
    pub fn new(v: Vec<f64>) -> Option<Self> {
        v.iter().all(|x| (0.0..=1.0).contains(x)).then_some(Self(v))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Debug)]
pub struct HeavySubspaceResult {
    pub found: bool,
    pub subspace: Option<Space>,
    /// Indices of every point lying in the subspace (exact membership), sorted.
    pub members: Vec<usize>,
    /// Independent member indices spanning the subspace.
    pub generators: Vec<usize>,
}

impl HeavySubspaceResult {
    pub fn not_found() -> Self {
        Self { found: false, subspace: None, members: Vec::new(), generators: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    /// Builds the result for the flat spanned by the given points.
    pub(crate) fn from_generators(points: &PointSet, generators: Vec<usize>) -> Result<Self, HeavyError> {
        let refs: Vec<&[i64]> = generators.iter().map(|&i| points.point(i)).collect();
        let (subspace, exact) = span_of_integer(points.dim(), &refs)?;
        if exact.rank() != generators.len() {
            return Err(HeavyError::InternalInvariantViolated("generators are dependent".into()));
        }
        let members = (0..points.len()).filter(|&i| exact.contains(points.point(i))).collect();
        Ok(Self { found: true, subspace: Some(subspace), members, generators })
    }

    /// Exact check of `|S∩W|·k ≥ dim(W)·|S|` with `W` proper.
    pub fn is_heavy_for(&self, n: usize, k: usize) -> bool {
        self.found && self.dim() < k && self.dim() >= 1 && self.members.len() * k >= self.dim() * n
    }
}

/// Decides whether a proper subspace of `space` holds at least a
/// `dim(W)/dim(V)` fraction of `points`, and returns one if so.
///
/// When the points do not span `space`, their own span is returned.
pub fn find_heavy_subspace(points: &PointSet, space: &Space) -> Result<HeavySubspaceResult, HeavyError> {
    let exact = ExactSpan::from_points(points.dim(), points.points().iter().map(Vec::as_slice));
    if points.is_empty() {
        return Err(HeavyError::RankDeficient);
    }
    let k = space.dim();
    if exact.rank() > k {
        return Err(HeavyError::NotInSubspace);
    }
    if points.points().iter().map(|p| p.iter().map(|&c| c as f64).collect::<Vec<_>>()).any(|p| space.relative_residual(&p) > 1e-6) {
        return Err(HeavyError::NotInSubspace);
    }
    if exact.rank() < k {
        let mut gens = Vec::new();
        let mut span = ExactSpan::new(points.dim());
        for i in 0..points.len() {
            if span.insert(points.point(i)) {
                gens.push(i);
            }
        }
        return HeavySubspaceResult::from_generators(points, gens);
    }
    find_heavy_spanning(points)
}

/// Same as [`find_heavy_subspace`] with `V = span(points)`.
pub fn find_heavy_spanning(points: &PointSet) -> Result<HeavySubspaceResult, HeavyError> {
    let dirs = Directions::new(points);
    if dirs.rank() <= 1 {
        return Ok(HeavySubspaceResult::not_found());
    }
    let found = if dirs.len() <= LP_DIRECTION_LIMIT {
        lp::find_by_lp(&dirs)?
    } else {
        partition::find_by_packing(&dirs)?
    };
    match found {
        None => Ok(HeavySubspaceResult::not_found()),
        Some(gen_dirs) => {
            let gens = gen_dirs.iter().map(|&d| dirs.representative(d)).collect();
            let res = HeavySubspaceResult::from_generators(points, gens)?;
            if !res.is_heavy_for(points.len(), dirs.rank()) {
                return Err(HeavyError::InternalInvariantViolated("returned subspace is not heavy".into()));
            }
            Ok(res)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(pts: &[&[i64]]) -> PointSet {
        PointSet::new(pts[0].len(), pts.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn worked_examples() {
        let full = Space::full(2);
        let r = find_heavy_subspace(&ps(&[&[1, 0], &[1, 0], &[0, 1]]), &full).unwrap();
        assert!(r.found);
        assert_eq!(r.members, vec![0, 1]);
        assert_eq!(r.dim(), 1);

        let r = find_heavy_subspace(&ps(&[&[1, 0], &[0, 1], &[1, 1]]), &full).unwrap();
        assert!(!r.found);

        let r = find_heavy_subspace(&ps(&[&[1, 0], &[0, 1]]), &full).unwrap();
        assert!(r.found);
        assert_eq!(r.members.len(), 1);
        assert!(r.is_heavy_for(2, 2));
    }

    #[test]
    fn non_spanning_returns_span() {
        let full = Space::full(3);
        let r = find_heavy_subspace(&ps(&[&[1, 0, 0], &[0, 1, 0], &[1, 1, 0]]), &full).unwrap();
        assert!(r.found);
        assert_eq!(r.dim(), 2);
        assert_eq!(r.members, vec![0, 1, 2]);
    }

    #[test]
    fn points_outside_space_rejected() {
        let line = crate::linalg::span_of(&[vec![1.0, 0.0]]).unwrap();
        assert_eq!(find_heavy_subspace(&ps(&[&[1, 0], &[0, 1]]), &line).unwrap_err(), HeavyError::NotInSubspace);
    }

    #[test]
    fn one_dimensional_space_has_no_proper_subspace() {
        let r = find_heavy_spanning(&ps(&[&[5], &[-3]])).unwrap();
        assert!(!r.found);
    }
}

#[cfg(test)]
mod cross_check {
    use super::*;
    use crate::harness::brute_force_heavy_subspace;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random small instance mixing a few base directions, multiples and
    /// low-dimensional structure.
    fn instance(rng: &mut ChaCha8Rng) -> PointSet {
        let d = rng.gen_range(2..=4);
        let n = rng.gen_range(1..=12);
        let pool: Vec<Vec<i64>> = (0..rng.gen_range(1..=n))
            .map(|_| loop {
                let p: Vec<i64> = (0..d).map(|_| rng.gen_range(-2..=2)).collect();
                if p.iter().any(|&c| c != 0) {
                    break p;
                }
            })
            .collect();
        let pts = (0..n)
            .map(|_| {
                let p = &pool[rng.gen_range(0..pool.len())];
                let s = rng.gen_range(1..=3) * if rng.gen::<bool>() { 1 } else { -1 };
                p.iter().map(|&c| c * s).collect()
            })
            .collect();
        PointSet::new(d, pts).unwrap()
    }

    #[test]
    fn routes_agree_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..400 {
            let s = instance(&mut rng);
            let dirs = Directions::new(&s);
            let space = crate::linalg::span_of(&s.to_f64()).unwrap_or_else(|e| panic!("{e:?} {:?}", s.points()));
            let brute = brute_force_heavy_subspace(&s, &space).unwrap();
            if dirs.rank() <= 1 {
                continue;
            }
            let lp = lp::find_by_lp(&dirs).unwrap();
            let pk = partition::find_by_packing(&dirs).unwrap();
            let bare = partition::search(&dirs, 0).unwrap();
            assert_eq!(lp.is_some(), brute.found, "lp vs brute on {:?}", s.points());
            assert_eq!(pk.is_some(), brute.found, "packing vs brute on {:?}", s.points());
            assert_eq!(bare.is_some(), brute.found, "bare packing vs brute on {:?}", s.points());
            for gens in [lp, pk, bare].into_iter().flatten() {
                let (_, span) = dirs.flat(gens);
                assert!(dirs.is_heavy(&span));
            }
        }
    }
}
