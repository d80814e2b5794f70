//! Exact integer span arithmetic.
//!
//! Membership and rank decisions on integer points are made with fraction-free
//! elimination. Rows are kept in `i128` while they fit and promoted to `BigInt`
//! on overflow.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

/// Float residual (relative to ‖x‖) above which a point is declared outside a
/// well-conditioned span without running exact elimination.
pub const FLOAT_OUTSIDE_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Debug)]
enum Row {
    Small(Vec<i128>),
    Big(Vec<BigInt>),
}

impl Row {
    fn to_big(&self) -> Vec<BigInt> {
        match self {
            Row::Small(v) => v.iter().map(|&a| BigInt::from(a)).collect(),
            Row::Big(v) => v.clone(),
        }
    }
}

/// Span of integer vectors in echelon form.
///
/// Invariant: row `i` is zero at the pivot columns of every row `j < i`.
#[derive(Clone, Debug)]
pub struct ExactSpan {
    dim: usize,
    pivots: Vec<usize>,
    rows: Vec<Row>,
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i128
}

fn normalize_small(v: &mut [i128]) {
    let g = v.iter().fold(0i128, |g, &a| gcd_i128(g, a));
    if g > 1 {
        v.iter_mut().for_each(|a| *a /= g);
    }
}

fn normalize_big(v: &mut [BigInt]) {
    let mut g = BigInt::zero();
    for a in v.iter() {
        g = g.gcd(a);
    }
    if g > BigInt::from(1) {
        v.iter_mut().for_each(|a| *a /= &g);
    }
}

impl ExactSpan {
    pub fn new(dim: usize) -> Self {
        Self { dim, pivots: Vec::new(), rows: Vec::new() }
    }

    pub fn from_points<'a>(dim: usize, points: impl IntoIterator<Item = &'a [i64]>) -> Self {
        let mut s = Self::new(dim);
        for p in points {
            s.insert(p);
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce_small(&self, x: &[i64]) -> Option<Vec<i128>> {
        let mut v: Vec<i128> = x.iter().map(|&a| a as i128).collect();
        for (&p, row) in self.pivots.iter().zip(&self.rows) {
            let r = match row {
                Row::Small(r) => r,
                Row::Big(_) => return None,
            };
            if v[p] == 0 {
                continue;
            }
            let g = gcd_i128(r[p], v[p]);
            let (a, b) = (r[p] / g, v[p] / g);
            for j in 0..v.len() {
                v[j] = a.checked_mul(v[j])?.checked_sub(b.checked_mul(r[j])?)?;
            }
            normalize_small(&mut v);
        }
        Some(v)
    }

    fn reduce_big(&self, x: &[i64]) -> Vec<BigInt> {
        let mut v: Vec<BigInt> = x.iter().map(|&a| BigInt::from(a)).collect();
        for (&p, row) in self.pivots.iter().zip(&self.rows) {
            if v[p].is_zero() {
                continue;
            }
            let r = row.to_big();
            let g = r[p].gcd(&v[p]);
            let a = &r[p] / &g;
            let b = &v[p] / &g;
            for j in 0..v.len() {
                v[j] = &a * &v[j] - &b * &r[j];
            }
            normalize_big(&mut v);
        }
        v
    }

    fn residual(&self, x: &[i64]) -> Row {
        assert_eq!(x.len(), self.dim, "dimension mismatch");
        match self.reduce_small(x) {
            Some(v) => Row::Small(v),
            None => Row::Big(self.reduce_big(x)),
        }
    }

    /// Exact membership test.
    pub fn contains(&self, x: &[i64]) -> bool {
        if self.rows.len() == self.dim {
            return true;
        }
        match self.residual(x) {
            Row::Small(v) => v.iter().all(|&a| a == 0),
            Row::Big(v) => v.iter().all(Zero::is_zero),
        }
    }

    /// Inserts `x` if it is independent of the current rows; returns whether it was.
    pub fn insert(&mut self, x: &[i64]) -> bool {
        if self.rows.len() == self.dim {
            return false;
        }
        let row = self.residual(x);
        let pivot = match &row {
            Row::Small(v) => v.iter().position(|&a| a != 0),
            Row::Big(v) => v.iter().position(|a| !a.is_zero()),
        };
        match pivot {
            None => false,
            Some(p) => {
                let row = match row {
                    Row::Big(v) if v.iter().all(|a| a.bits() < 100) => {
                        Row::Small(v.iter().map(|a| a.to_i128().unwrap()).collect())
                    }
                    Row::Small(v) if v.iter().any(|a| a.unsigned_abs() >= 1u128 << 100) => {
                        Row::Big(v.iter().map(|&a| BigInt::from(a)).collect())
                    }
                    other => other,
                };
                self.pivots.push(p);
                self.rows.push(row);
                true
            }
        }
    }

    /// Integer basis of the orthogonal complement (vectors `z` with `z·x = 0` for
    /// every `x` in the span).
    pub fn annihilator(&self) -> Annihilator {
        let mut rows: Vec<(usize, Vec<BigInt>)> =
            self.pivots.iter().zip(&self.rows).map(|(&p, r)| (p, r.to_big())).collect();
        rows.sort_by_key(|(p, _)| *p);
        // Back-substitute so every pivot column has a single nonzero entry.
        for i in 0..rows.len() {
            let (pi, ri) = rows[i].clone();
            for j in 0..rows.len() {
                if j == i || rows[j].1[pi].is_zero() {
                    continue;
                }
                let rj = &mut rows[j].1;
                let g = ri[pi].gcd(&rj[pi]);
                let a = &ri[pi] / &g;
                let b = &rj[pi] / &g;
                for c in 0..rj.len() {
                    rj[c] = &a * &rj[c] - &b * &ri[c];
                }
                normalize_big(rj);
            }
        }
        let pivot_set: Vec<bool> = {
            let mut s = vec![false; self.dim];
            rows.iter().for_each(|(p, _)| s[*p] = true);
            s
        };
        let mut vectors = Vec::new();
        for f in (0..self.dim).filter(|&f| !pivot_set[f]) {
            let mut l = BigInt::from(1);
            for (p, r) in &rows {
                if !r[f].is_zero() {
                    l = l.lcm(&r[*p]);
                }
            }
            let mut z = vec![BigInt::zero(); self.dim];
            z[f] = l.clone();
            for (p, r) in &rows {
                if !r[f].is_zero() {
                    z[*p] = -(&l / &r[*p]) * &r[f];
                }
            }
            normalize_big(&mut z);
            vectors.push(z);
        }
        Annihilator::new(self.dim, vectors)
    }
}

/// Integer vectors spanning the orthogonal complement of an integer span.
#[derive(Clone, Debug)]
pub struct Annihilator {
    dim: usize,
    small: Option<Vec<Vec<i64>>>,
    big: Vec<Vec<BigInt>>,
}

impl Annihilator {
    fn new(dim: usize, big: Vec<Vec<BigInt>>) -> Self {
        let small = big
            .iter()
            .map(|z| z.iter().map(|a| a.to_i64()).collect::<Option<Vec<i64>>>())
            .collect::<Option<Vec<_>>>();
        Self { dim, small, big }
    }

    pub fn len(&self) -> usize {
        self.big.len()
    }

    pub fn is_empty(&self) -> bool {
        self.big.is_empty()
    }

    /// Sign of `z_idx · x`.
    pub fn dot_sign(&self, idx: usize, x: &[i64]) -> i8 {
        debug_assert_eq!(x.len(), self.dim);
        if let Some(small) = &self.small {
            let mut acc: i128 = 0;
            let mut ok = true;
            for (&a, &b) in small[idx].iter().zip(x) {
                match acc.checked_add(a as i128 * b as i128) {
                    Some(v) => acc = v,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return acc.signum() as i8;
            }
        }
        let s: BigInt = self.big[idx].iter().zip(x).map(|(a, &b)| a * BigInt::from(b)).sum();
        if s.is_zero() {
            0
        } else if s.is_positive() {
            1
        } else {
            -1
        }
    }

    /// Coordinates where vector `idx` is nonzero.
    pub fn support(&self, idx: usize) -> Vec<usize> {
        (0..self.dim).filter(|&c| !self.big[idx][c].is_zero()).collect()
    }

    pub fn annihilates(&self, x: &[i64]) -> bool {
        (0..self.len()).all(|i| self.dot_sign(i, x) == 0)
    }
}

/// Exact rank of a set of integer points.
pub fn exact_rank(dim: usize, points: &[Vec<i64>]) -> usize {
    ExactSpan::from_points(dim, points.iter().map(Vec::as_slice)).rank()
}

/// Incremental span combining a float orthonormal basis (fast rejection) with
/// exact elimination (all positive membership answers).
#[derive(Clone, Debug)]
pub struct HybridSpan {
    exact: ExactSpan,
    q: Vec<Vec<f64>>,
    reliable: bool,
}

fn float_residual(q: &[Vec<f64>], x: &[i64]) -> f64 {
    let mut r: Vec<f64> = x.iter().map(|&a| a as f64).collect();
    let n0 = r.iter().map(|a| a * a).sum::<f64>().sqrt();
    if n0 == 0.0 {
        return 0.0;
    }
    r.iter_mut().for_each(|a| *a /= n0);
    for _ in 0..2 {
        for col in q {
            let d: f64 = col.iter().zip(&r).map(|(a, b)| a * b).sum();
            r.iter_mut().zip(col).for_each(|(ri, ci)| *ri -= d * ci);
        }
    }
    r.iter().map(|a| a * a).sum::<f64>().sqrt()
}

impl HybridSpan {
    pub fn new(dim: usize) -> Self {
        Self { exact: ExactSpan::new(dim), q: Vec::new(), reliable: true }
    }

    pub fn rank(&self) -> usize {
        self.exact.rank()
    }

    pub fn exact(&self) -> &ExactSpan {
        &self.exact
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        if self.reliable && float_residual(&self.q, x) > FLOAT_OUTSIDE_THRESHOLD {
            return false;
        }
        self.exact.contains(x)
    }

    pub fn insert(&mut self, x: &[i64]) -> bool {
        if !self.exact.insert(x) {
            return false;
        }
        if self.reliable {
            let mut r: Vec<f64> = x.iter().map(|&a| a as f64).collect();
            let n0 = r.iter().map(|a| a * a).sum::<f64>().sqrt();
            r.iter_mut().for_each(|a| *a /= n0);
            for _ in 0..2 {
                for col in &self.q {
                    let d: f64 = col.iter().zip(&r).map(|(a, b)| a * b).sum();
                    r.iter_mut().zip(col).for_each(|(ri, ci)| *ri -= d * ci);
                }
            }
            let nr = r.iter().map(|a| a * a).sum::<f64>().sqrt();
            if nr > FLOAT_OUTSIDE_THRESHOLD {
                r.iter_mut().for_each(|a| *a /= nr);
                self.q.push(r);
            } else {
                self.reliable = false;
            }
        }
        true
    }
}

/// Primitive integer vector on the same line as `p`, first nonzero entry
/// positive. The zero vector is returned unchanged.
pub fn primitive(p: &[i64]) -> Vec<i64> {
    let g = p.iter().fold(0u64, |g, &c| num_integer::gcd(g, c.unsigned_abs()));
    if g == 0 {
        return p.to_vec();
    }
    let lead = p.iter().find(|&&c| c != 0).copied().unwrap_or(1);
    let s = if lead < 0 { -1 } else { 1 };
    p.iter().map(|&c| s * (c / g as i64)).collect()
}
