use crate::dataset::PointSet;
use crate::heavy::HeavySubspaceResult;
use crate::linalg::exact::ExactSpan;
use crate::Space;

use super::HarnessError;

pub const BRUTE_MAX_DIM: usize = 4;
pub const BRUTE_MAX_POINTS: usize = 12;

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let r = c.len();
    for i in (0..r).rev() {
        if c[i] < n - r + i {
            c[i] += 1;
            for j in i + 1..r {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Heavy-subspace oracle by enumeration of the spans of all subsets of at
/// most `dim(V) − 1` points. Returns the first heavy span in order of subset
/// size, then lexicographic subset order.
pub fn brute_force_heavy_subspace(points: &PointSet, space: &Space) -> Result<HeavySubspaceResult, HarnessError> {
    if points.dim() > BRUTE_MAX_DIM || points.len() > BRUTE_MAX_POINTS {
        return Err(HarnessError::SizeLimit { dim: points.dim(), n: points.len() });
    }
    let n = points.len();
    let k = space.dim();
    for size in 1..k.min(n + 1) {
        let mut c: Vec<usize> = (0..size).collect();
        loop {
            let span = ExactSpan::from_points(points.dim(), c.iter().map(|&i| points.point(i)));
            let r = span.rank();
            if r < k {
                let count = (0..n).filter(|&i| span.contains(points.point(i))).count();
                if count * k >= r * n {
                    let mut gens = Vec::new();
                    let mut g = ExactSpan::new(points.dim());
                    for &i in &c {
                        if g.insert(points.point(i)) {
                            gens.push(i);
                        }
                    }
                    return Ok(HeavySubspaceResult::from_generators(points, gens)?);
                }
            }
            if !next_combination(&mut c, n) {
                break;
            }
        }
    }
    Ok(HeavySubspaceResult::not_found())
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
        let r = brute_force_heavy_subspace(&ps(&[&[1, 0], &[1, 0], &[0, 1]]), &full).unwrap();
        assert!(r.found && r.members == vec![0, 1]);
        assert!(!brute_force_heavy_subspace(&ps(&[&[1, 0], &[0, 1], &[1, 1]]), &full).unwrap().found);
        let r = brute_force_heavy_subspace(&ps(&[&[3, 4]]), &full).unwrap();
        assert!(r.found && r.members == vec![0]);
    }

    #[test]
    fn size_limit() {
        let s = PointSet::new(5, vec![vec![1, 0, 0, 0, 0]]).unwrap();
        assert!(matches!(brute_force_heavy_subspace(&s, &Space::full(5)), Err(HarnessError::SizeLimit { .. })));
    }
}
