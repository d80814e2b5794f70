use std::collections::HashMap;

use crate::dataset::PointSet;
use crate::linalg::exact::{primitive, HybridSpan};

/// Points grouped by the line they span, with multiplicities.
///
/// Membership in any subspace only depends on the line, so the heavy-subspace
/// engines work on distinct directions weighted by their point counts.
#[derive(Clone, Debug)]
pub struct Directions {
    dim: usize,
    vecs: Vec<Vec<i64>>,
    unit: Vec<Vec<f64>>,
    members: Vec<Vec<usize>>,
    n: usize,
    rank: usize,
}

pub(crate) fn unit_vector(p: &[i64]) -> Vec<f64> {
    let v: Vec<f64> = p.iter().map(|&c| c as f64).collect();
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / n).collect()
}

impl Directions {
    pub fn new(points: &PointSet) -> Self {
        let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
        let mut vecs = Vec::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        for (i, p) in points.points().iter().enumerate() {
            let key = primitive(p);
            let id = *index.entry(key.clone()).or_insert_with(|| {
                vecs.push(key);
                members.push(Vec::new());
                vecs.len() - 1
            });
            members[id].push(i);
        }
        let unit = vecs.iter().map(|v| unit_vector(v)).collect();
        let mut span = HybridSpan::new(points.dim());
        let mut rank = 0;
        for v in &vecs {
            if span.insert(v) {
                rank += 1;
            }
        }
        Self { dim: points.dim(), vecs, unit, members, n: points.len(), rank }
    }

    pub fn len(&self) -> usize {
        self.vecs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vecs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Rank of the whole set (`k = dim(V)`).
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number of points, counted with multiplicity.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mult(&self, d: usize) -> usize {
        self.members[d].len()
    }

    pub fn members(&self, d: usize) -> &[usize] {
        &self.members[d]
    }

    /// First point index on direction `d`.
    pub fn representative(&self, d: usize) -> usize {
        self.members[d][0]
    }

    pub fn vec(&self, d: usize) -> &[i64] {
        &self.vecs[d]
    }

    pub fn unit(&self, d: usize) -> &[f64] {
        &self.unit[d]
    }

    /// Exact span of the given directions with an independent generator list.
    pub fn flat(&self, dirs: impl IntoIterator<Item = usize>) -> (Vec<usize>, HybridSpan) {
        let mut span = HybridSpan::new(self.dim);
        let mut gens = Vec::new();
        for d in dirs {
            if span.insert(&self.vecs[d]) {
                gens.push(d);
            }
        }
        (gens, span)
    }

    /// Number of points (with multiplicity) on directions inside `span`.
    pub fn count_in(&self, span: &HybridSpan) -> usize {
        (0..self.len()).filter(|&d| span.contains(&self.vecs[d])).map(|d| self.mult(d)).sum()
    }

    /// `k·|S∩F| ≥ n·r(F)` for a proper nonzero flat.
    pub fn is_heavy(&self, span: &HybridSpan) -> bool {
        let r = span.rank();
        r >= 1 && r < self.rank && self.count_in(span) * self.rank >= self.n * r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_parallel_points() {
        let s = PointSet::new(2, vec![vec![2, 4], vec![1, 0], vec![-1, -2], vec![3, 6], vec![0, 5]]).unwrap();
        let d = Directions::new(&s);
        assert_eq!(d.len(), 3);
        assert_eq!(d.members(0), &[0, 2, 3]);
        assert_eq!(d.vec(0), &[1, 2]);
        assert_eq!(d.rank(), 2);
        assert_eq!(d.n(), 5);
    }
}
