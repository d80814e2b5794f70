//! Exact heavy-flat search by base packing.
//!
//! `k` copies of every point are distributed over `n` bases of `V` with the
//! matroid-partition augmenting-path algorithm. A failed augmentation labels a
//! set whose span is a strictly heavy flat. If the packing completes, no flat
//! is strictly heavy, and a flat meeting the bound with equality exists exactly
//! when the exchange graph (an edge `x → y` whenever `y` lies in the circuit of
//! `x` in some basis) is not strongly connected; the closed set is that flat.
//!
//! Independence and circuit supports are decided with a float QR where the
//! answer is certain (large residuals) and exact elimination otherwise.

use std::collections::{HashSet, VecDeque};

use super::directions::Directions;
use super::HeavyError;
use crate::linalg::exact::{ExactSpan, FLOAT_OUTSIDE_THRESHOLD};

/// Candidate flats built from circuits seen while packing, checked exactly
/// before the full search runs.
const CIRCUIT_CANDIDATES: usize = 64;
const COND_LIMIT: f64 = 1e8;

#[derive(Clone, Debug)]
struct FloatBasis {
    q: Vec<Vec<f64>>,
    rinv: Vec<Vec<f64>>,
    row_norm: Vec<f64>,
    ok: bool,
}

impl FloatBasis {
    fn build(cols: &[&[f64]]) -> Self {
        let r = cols.len();
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(r);
        let mut rm = vec![vec![0.0; r]; r];
        let mut ok = true;
        for (j, c) in cols.iter().enumerate() {
            let mut v = c.to_vec();
            for _ in 0..2 {
                for (i, qi) in q.iter().enumerate() {
                    let d: f64 = qi.iter().zip(&v).map(|(a, b)| a * b).sum();
                    rm[i][j] += d;
                    v.iter_mut().zip(qi).for_each(|(vi, qv)| *vi -= d * qv);
                }
            }
            let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if !(nv > 1e-12) {
                ok = false;
                q.push(vec![0.0; v.len()]);
                rm[j][j] = 0.0;
                continue;
            }
            v.iter_mut().for_each(|a| *a /= nv);
            rm[j][j] = nv;
            q.push(v);
        }
        let mut rinv = vec![vec![0.0; r]; r];
        if ok {
            for j in 0..r {
                rinv[j][j] = 1.0 / rm[j][j];
                for i in (0..j).rev() {
                    let s: f64 = (i + 1..=j).map(|l| rm[i][l] * rinv[l][j]).sum();
                    rinv[i][j] = -s / rm[i][i];
                }
            }
            let fr = |m: &Vec<Vec<f64>>| m.iter().flatten().map(|a| a * a).sum::<f64>().sqrt();
            ok = fr(&rm) * fr(&rinv) <= COND_LIMIT;
        }
        let row_norm = rinv.iter().map(|row| row.iter().map(|a| a * a).sum::<f64>().sqrt()).collect();
        Self { q, rinv, row_norm, ok }
    }

    fn residual(&self, u: &[f64]) -> f64 {
        let mut v = u.to_vec();
        for _ in 0..2 {
            for qi in &self.q {
                let d: f64 = qi.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(qi).for_each(|(vi, qv)| *vi -= d * qv);
            }
        }
        v.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// Distance of `u` to the span of all columns but `t`, for every `t`
    /// (valid when `u` lies in the span of the columns).
    fn leave_one_out(&self, u: &[f64]) -> Vec<f64> {
        let c: Vec<f64> = self.q.iter().map(|qi| qi.iter().zip(u).map(|(a, b)| a * b).sum()).collect();
        (0..c.len())
            .map(|t| {
                let lam: f64 = (t..c.len()).map(|l| self.rinv[t][l] * c[l]).sum();
                lam.abs() / self.row_norm[t]
            })
            .collect()
    }
}

#[derive(Clone, Debug, Default)]
struct Basis {
    elems: Vec<usize>,
    float: Option<FloatBasis>,
    exact: Option<ExactSpan>,
}

struct Packing<'a> {
    dirs: &'a Directions,
    k: usize,
    bases: Vec<Basis>,
}

impl<'a> Packing<'a> {
    fn float(&mut self, j: usize) -> &FloatBasis {
        let dirs = self.dirs;
        let b = &mut self.bases[j];
        b.float.get_or_insert_with(|| {
            let cols: Vec<&[f64]> = b.elems.iter().map(|&d| dirs.unit(d)).collect();
            FloatBasis::build(&cols)
        })
    }

    fn exact(&mut self, j: usize) -> &ExactSpan {
        let dirs = self.dirs;
        let b = &mut self.bases[j];
        b.exact.get_or_insert_with(|| ExactSpan::from_points(dirs.dim(), b.elems.iter().map(|&d| dirs.vec(d))))
    }

    fn independent_with(&mut self, j: usize, d: usize) -> bool {
        if self.bases[j].elems.len() >= self.k {
            return false;
        }
        let dirs = self.dirs;
        let fb = self.float(j);
        if fb.ok && fb.residual(dirs.unit(d)) > FLOAT_OUTSIDE_THRESHOLD {
            return true;
        }
        !self.exact(j).contains(dirs.vec(d))
    }

    /// Elements of basis `j` in the circuit of `d` (which must depend on it).
    fn circuit(&mut self, j: usize, d: usize) -> Vec<usize> {
        if let Some(&same) = self.bases[j].elems.iter().find(|&&e| e == d) {
            return vec![same];
        }
        let dirs = self.dirs;
        let fb = self.float(j);
        let ok = fb.ok;
        let dist = if fb.ok { fb.leave_one_out(dirs.unit(d)) } else { vec![0.0; self.bases[j].elems.len()] };
        let elems = &self.bases[j].elems;
        if dist.iter().all(|&x| x > FLOAT_OUTSIDE_THRESHOLD) {
            return elems.clone();
        }
        // Float says every other coefficient is nonzero; if x lies in the span
        // of those elements alone, the uncertain coefficients are exactly zero.
        let x = dirs.vec(d);
        let sure: Vec<usize> = (0..elems.len()).filter(|&t| dist[t] > FLOAT_OUTSIDE_THRESHOLD).collect();
        if ok && ExactSpan::from_points(dirs.dim(), sure.iter().map(|&t| dirs.vec(elems[t]))).contains(x) {
            return sure.into_iter().map(|t| elems[t]).collect();
        }
        // Exact: the kernel of [b_1 … b_r | x] is one-dimensional and its
        // support on the b's is the circuit.
        let rows: Vec<Vec<i64>> = (0..dirs.dim())
            .map(|i| elems.iter().map(|&e| dirs.vec(e)[i]).chain(std::iter::once(x[i])).collect())
            .collect();
        let kernel = ExactSpan::from_points(elems.len() + 1, rows.iter().map(Vec::as_slice)).annihilator();
        debug_assert_eq!(kernel.len(), 1);
        kernel.support(0).into_iter().filter(|&t| t < elems.len()).map(|t| elems[t]).collect()
    }

    fn insert(&mut self, j: usize, d: usize) {
        let b = &mut self.bases[j];
        b.elems.push(d);
        b.float = None;
        b.exact = None;
    }

    fn remove(&mut self, j: usize, d: usize) {
        let b = &mut self.bases[j];
        let pos = b.elems.iter().position(|&e| e == d).expect("element present");
        b.elems.remove(pos);
        b.float = None;
        b.exact = None;
    }

    fn contains(&self, j: usize, d: usize) -> bool {
        self.bases[j].elems.contains(&d)
    }

    /// Places one more copy of `s`; on failure returns the labeled directions.
    fn augment(&mut self, s: usize) -> Result<(), Vec<usize>> {
        // Node: (direction, basis it currently sits in; None for the new copy).
        let mut nodes: Vec<(usize, Option<usize>)> = vec![(s, None)];
        let mut parent: Vec<Option<(usize, usize)>> = vec![None];
        let mut labeled: HashSet<(usize, usize)> = HashSet::new();
        // Copies of one direction reach the same circuits; explore each
        // (direction, basis) pair once.
        let mut explored: HashSet<(usize, usize)> = HashSet::new();
        let mut queue = VecDeque::from([0usize]);
        let nb = self.bases.len();
        while let Some(x) = queue.pop_front() {
            let (dx, bx) = nodes[x];
            for j in 0..nb {
                if Some(j) == bx || !explored.insert((dx, j)) {
                    continue;
                }
                if !self.contains(j, dx) && self.independent_with(j, dx) {
                    self.apply(&nodes, &parent, x, j);
                    return Ok(());
                }
                for y in self.circuit(j, dx) {
                    if labeled.insert((y, j)) {
                        nodes.push((y, Some(j)));
                        parent.push(Some((x, j)));
                        queue.push_back(nodes.len() - 1);
                    }
                }
            }
        }
        let mut out: Vec<usize> = nodes.iter().map(|&(d, _)| d).collect();
        out.sort_unstable();
        out.dedup();
        Err(out)
    }

    fn apply(&mut self, nodes: &[(usize, Option<usize>)], parent: &[Option<(usize, usize)>], last: usize, sink: usize) {
        let (mut cur, mut target) = (last, sink);
        loop {
            let (d, home) = nodes[cur];
            self.insert(target, d);
            match parent[cur] {
                None => break,
                Some((p, via)) => {
                    debug_assert_eq!(home, Some(via));
                    self.remove(via, d);
                    cur = p;
                    target = via;
                }
            }
        }
    }
}

/// Checks a candidate flat exactly; returns its generators when heavy.
fn heavy_flat(dirs: &Directions, members: impl IntoIterator<Item = usize>) -> Option<Vec<usize>> {
    let (gens, span) = dirs.flat(members);
    dirs.is_heavy(&span).then_some(gens)
}

pub(super) fn find_by_packing(dirs: &Directions) -> Result<Option<Vec<usize>>, HeavyError> {
    search(dirs, CIRCUIT_CANDIDATES)
}

pub(super) fn search(dirs: &Directions, hints: usize) -> Result<Option<Vec<usize>>, HeavyError> {
    let k = dirs.rank();
    let n = dirs.n();
    let m = dirs.len();
    if let Some(d) = (0..m).find(|&d| dirs.mult(d) * k >= n) {
        return Ok(Some(vec![d]));
    }

    let mut pk = Packing { dirs, k, bases: vec![Basis::default(); n] };
    let mut pending = Vec::new();
    let mut tried: HashSet<Vec<usize>> = HashSet::new();
    let mut slot = 0usize;
    for d in 0..m {
        for _ in 0..dirs.mult(d) * k {
            let j = slot % n;
            slot += 1;
            if pk.independent_with(j, d) {
                pk.insert(j, d);
                continue;
            }
            pending.push(d);
            if tried.len() < hints && pk.bases[j].elems.len() < k {
                let mut c = pk.circuit(j, d);
                c.push(d);
                c.sort_unstable();
                if tried.insert(c.clone()) {
                    if let Some(g) = heavy_flat(dirs, c) {
                        return Ok(Some(g));
                    }
                }
            }
        }
    }
    for d in pending {
        if let Err(labeled) = pk.augment(d) {
            return heavy_flat(dirs, labeled)
                .map(Some)
                .ok_or_else(|| HeavyError::InternalInvariantViolated("failed augmentation without a heavy flat".into()));
        }
    }
    debug_assert!(pk.bases.iter().all(|b| b.elems.len() == k));

    if let Some(closed) = forward_closure(&mut pk, 0) {
        return heavy_flat(dirs, closed)
            .map(Some)
            .ok_or_else(|| HeavyError::InternalInvariantViolated("closed set is not a tight flat".into()));
    }
    if let Some(closed) = backward_complement(&mut pk, 0) {
        return heavy_flat(dirs, closed)
            .map(Some)
            .ok_or_else(|| HeavyError::InternalInvariantViolated("closed set is not a tight flat".into()));
    }
    Ok(None)
}

/// Directions reachable from `start`; `None` when that is everything.
fn forward_closure(pk: &mut Packing, start: usize) -> Option<Vec<usize>> {
    let m = pk.dirs.len();
    let mut seen = vec![false; m];
    let mut count = 1;
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(p) = queue.pop_front() {
        for j in 0..pk.bases.len() {
            if count == m {
                return None;
            }
            if pk.contains(j, p) || pk.bases[j].elems.iter().all(|&e| seen[e]) {
                continue;
            }
            for y in pk.circuit(j, p) {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
    }
    (count < m).then(|| (0..m).filter(|&d| seen[d]).collect())
}

/// Complement of the set of directions that reach `start`, when nonempty.
fn backward_complement(pk: &mut Packing, start: usize) -> Option<Vec<usize>> {
    let m = pk.dirs.len();
    let dirs = pk.dirs;
    let mut seen = vec![false; m];
    let mut count = 1;
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(q) = queue.pop_front() {
        for j in 0..pk.bases.len() {
            if count == m {
                return None;
            }
            let Some(t) = pk.bases[j].elems.iter().position(|&e| e == q) else { continue };
            let elems = pk.bases[j].elems.clone();
            let fb = pk.float(j).clone();
            let mut others: Option<ExactSpan> = None;
            for p in 0..m {
                if seen[p] || elems.contains(&p) {
                    continue;
                }
                let certain = fb.ok && fb.leave_one_out(dirs.unit(p))[t] > FLOAT_OUTSIDE_THRESHOLD;
                let in_circuit = certain || {
                    let span = others.get_or_insert_with(|| {
                        ExactSpan::from_points(dirs.dim(), elems.iter().filter(|&&f| f != q).map(|&f| dirs.vec(f)))
                    });
                    !span.contains(dirs.vec(p))
                };
                if in_circuit {
                    seen[p] = true;
                    count += 1;
                    queue.push_back(p);
                }
            }
        }
    }
    (count < m).then(|| (0..m).filter(|&d| !seen[d]).collect())
}
