#![allow(dead_code)]

use forster::dataset::PointSet;
use forster::linalg::exact::exact_rank;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn nonzero(rng: &mut ChaCha8Rng, d: usize, lim: i64) -> Vec<i64> {
    loop {
        let p: Vec<i64> = (0..d).map(|_| rng.gen_range(-lim..=lim)).collect();
        if p.iter().any(|&c| c != 0) {
            return p;
        }
    }
}

/// `rank` independent small integer vectors.
pub fn basis(rng: &mut ChaCha8Rng, d: usize, rank: usize, lim: i64) -> Vec<Vec<i64>> {
    loop {
        let b: Vec<Vec<i64>> = (0..rank).map(|_| nonzero(rng, d, lim)).collect();
        if exact_rank(d, &b) == rank {
            return b;
        }
    }
}

/// Nonzero integer combination of `basis` with coefficients in `[-c, c]`.
pub fn in_span(rng: &mut ChaCha8Rng, basis: &[Vec<i64>], c: i64) -> Vec<i64> {
    let d = basis[0].len();
    loop {
        let mut z = vec![0i64; d];
        for b in basis {
            let t = rng.gen_range(-c..=c);
            z.iter_mut().zip(b).for_each(|(zi, &bi)| *zi += t * bi);
        }
        if z.iter().any(|&v| v != 0) {
            return z;
        }
    }
}

/// Points drawn from a few random low-dimensional subspaces plus generic
/// points, so decompositions have several pieces.
pub fn structured(rng: &mut ChaCha8Rng, d: usize, n: usize, lim: i64) -> PointSet {
    let flats: Vec<Vec<Vec<i64>>> = (0..rng.gen_range(1..=3))
        .map(|_| {
            let r = rng.gen_range(1..d.max(2));
            basis(rng, d, r.min(d), 3)
        })
        .collect();
    let pts = (0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            if u < 0.6 {
                let f = &flats[rng.gen_range(0..flats.len())];
                in_span(rng, f, 4)
            } else {
                nonzero(rng, d, lim)
            }
        })
        .collect();
    PointSet::new(d, pts).unwrap()
}

pub fn generic(rng: &mut ChaCha8Rng, d: usize, n: usize, bits: u32) -> PointSet {
    let lim = (1i64 << bits) - 1;
    PointSet::new(d, (0..n).map(|_| nonzero(rng, d, lim)).collect()).unwrap()
}
