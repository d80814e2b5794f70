//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use forster::dataset::{massart_draw, CountingOracle, Marginal, MassartModel, MassartOracle, NoiseRate, PointSet};
use forster::harness::{bit_independence_study, brute_force_heavy_subspace, error_spread, StudyConfig};
use forster::heavy::{find_heavy_subspace, HeavySubspaceResult};
use forster::learner::{evaluate_classifier, learn_halfspace, LearnerConfig};
use forster::linalg::exact::ExactSpan;
use forster::linalg::sym_eigen;
use forster::scaling::{ellipsoid_scaling, solve_scaling_sdp, ScalingWeights};
use forster::transform::{forster_decompose, forster_transform, piece_bound, verify_piece, ForsterDecomposition};
use forster::{Mat, Space};

use common::{basis, generic, in_span, nonzero, structured};

const DELTA: f64 = 1e-3;
const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn full(d: usize) -> Space {
    Space::full(d)
}

fn heavy_free(points: &PointSet) -> bool {
    let space = full(points.dim());
    !find_heavy_subspace(points, &space).unwrap().found
}

/// `λ_min(((k+δ)/n)·Σ c²yyᵀ − c²(x)xxᵀ) ≥ −1e−9·tr(Σ_c)` for every member,
/// assembled from raw coordinates with one eigendecomposition per point.
fn recheck_weights(points: &PointSet, members: &[usize], space: &Space, w: &ScalingWeights) -> bool {
    let k = space.dim();
    let n = members.len() as f64;
    let coords: Vec<Vec<f64>> = members.iter().map(|&i| space.coords(&points.point(i).iter().map(|&c| c as f64).collect::<Vec<_>>())).collect();
    let mut sigma = Mat::zeros(k, k);
    for (x, &c) in coords.iter().zip(&w.c_sq) {
        sigma.add_outer(x, c / n);
    }
    let tol = PSD_TOL * sigma.trace();
    coords.iter().zip(&w.c_sq).all(|(x, &c)| {
        let mut m = Mat::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                m[(i, j)] = (k as f64 + w.delta) * sigma[(i, j)] - c * x[i] * x[j];
            }
        }
        sym_eigen(&m).map(|e| e.min() >= -tol).unwrap_or(false)
    })
}

fn criterion_1() -> Outcome {
    let mut r = rng(101);
    let (mut done, mut bad, mut skipped) = (0, 0, 0);
    let mut worst_dist: f64 = 0.0;
    let mut slowest = Duration::ZERO;
    while done < 200 {
        let d = r.gen_range(2..=8);
        let n = r.gen_range(d + 1..=200);
        let b = r.gen_range(1..=20);
        let pts = generic(&mut r, d, n, b);
        if !heavy_free(&pts) {
            skipped += 1;
            continue;
        }
        if d <= 4 && n <= 12 && brute_force_heavy_subspace(&pts, &full(d)).unwrap().found {
            skipped += 1;
            continue;
        }
        done += 1;
        let t0 = Instant::now();
        let ok = match forster_transform(&pts, DELTA) {
            Ok(p) => {
                let rep = verify_piece(&p, &pts);
                worst_dist = worst_dist.max(rep.distance);
                p.dim() == d && p.members.len() == n && rep.distance <= DELTA && (rep.trace - 1.0).abs() <= TRACE_TOL
            }
            Err(_) => false,
        };
        let el = t0.elapsed();
        slowest = slowest.max(el);
        bad += usize::from(!ok || el >= Duration::from_secs(10));
    }
    Outcome {
        pass: bad == 0,
        detail: format!("{done} instances ({skipped} heavy ones skipped), {bad} failures, worst distance {worst_dist:.3e}, slowest {:.2}s", slowest.as_secs_f64()),
    }
}

fn exact_heavy(points: &PointSet, res: &HeavySubspaceResult, k: usize) -> bool {
    let span = ExactSpan::from_points(points.dim(), res.generators.iter().map(|&i| points.point(i)));
    let w = span.rank();
    let count = points.points().iter().filter(|p| span.contains(p)).count();
    w >= 1 && w < k && count * k >= w * points.len()
}

/// Instances built so that a subspace holds exactly a `dim(W)/d` fraction,
/// and twins with one member moved off it.
fn equality_cases() -> Vec<PointSet> {
    let mut r = rng(202);
    let mut out = Vec::new();
    while out.len() < 50 {
        let d = r.gen_range(2..=4);
        let w = r.gen_range(1..d);
        let groups = r.gen_range(1..=12 / d);
        let n = groups * d;
        let m = groups * w;
        let flat = basis(&mut r, d, w, 3);
        let mut pts: Vec<Vec<i64>> = (0..m).map(|_| in_span(&mut r, &flat, 3)).collect();
        pts.extend((m..n).map(|_| nonzero(&mut r, d, 9)));
        out.push(PointSet::new(d, pts.clone()).unwrap());
        if m >= 1 {
            pts[0] = nonzero(&mut r, d, 9);
            out.push(PointSet::new(d, pts).unwrap());
        }
    }
    out.truncate(50);
    out
}

fn criterion_2() -> Outcome {
    let mut r = rng(303);
    let mut cases: Vec<PointSet> = (0..500)
        .map(|_| {
            let d = r.gen_range(1..=4);
            let n = r.gen_range(1..=12);
            let lim = r.gen_range(1..=3);
            PointSet::new(d, (0..n).map(|_| nonzero(&mut r, d, lim)).collect()).unwrap()
        })
        .collect();
    cases.extend(equality_cases());
    let (mut disagree, mut unsound, mut found) = (0, 0, 0);
    for pts in &cases {
        let space = full(pts.dim());
        let fast = find_heavy_subspace(pts, &space).unwrap();
        let brute = brute_force_heavy_subspace(pts, &space).unwrap();
        disagree += usize::from(fast.found != brute.found);
        if fast.found {
            found += 1;
            unsound += usize::from(!exact_heavy(pts, &fast, pts.dim()));
        }
    }
    Outcome {
        pass: disagree == 0 && unsound == 0,
        detail: format!("{} instances ({found} heavy), {disagree} disagreements with brute force, {unsound} returned subspaces failing the exact count", cases.len()),
    }
}

fn criterion_3() -> Outcome {
    let (mut checked, mut bad) = (0, 0);
    // Fixed-point path, through the transform.
    let mut r = rng(404);
    while checked < 60 {
        let d = r.gen_range(2..=6);
        let n = r.gen_range(d + 1..=120);
        let b = r.gen_range(2..=20);
        let pts = generic(&mut r, d, n, b);
        if !heavy_free(&pts) {
            continue;
        }
        checked += 1;
        match solve_scaling_sdp(&pts, &full(d), DELTA) {
            Ok(w) => bad += usize::from(!recheck_weights(&pts, &(0..n).collect::<Vec<_>>(), &full(d), &w)),
            Err(_) => bad += 1,
        }
    }
    // Ellipsoid path on small heavy-free instances.
    let mut ell = 0;
    while ell < 40 {
        let d = r.gen_range(2..=3);
        let n = r.gen_range(d..=8);
        let pts = PointSet::new(d, (0..n).map(|_| nonzero(&mut r, d, 4)).collect()).unwrap();
        if brute_force_heavy_subspace(&pts, &full(d)).unwrap().found {
            continue;
        }
        ell += 1;
        match ellipsoid_scaling(&pts, &full(d), 0.05) {
            Ok(w) => bad += usize::from(!recheck_weights(&pts, &(0..n).collect::<Vec<_>>(), &full(d), &w)),
            Err(_) => bad += 1,
        }
    }
    // Weights carried by decomposition pieces.
    let mut pieces = 0;
    for seed in 0..20 {
        let mut r = rng(4040 + seed);
        let d = r.gen_range(2..=6);
        let n = r.gen_range(10..=150);
        let pts = structured(&mut r, d, n, 50);
        let dec = forster_decompose(&pts, DELTA).unwrap();
        for p in &dec.pieces {
            pieces += 1;
            bad += usize::from(!recheck_weights(&pts, &p.members, &p.subspace, &p.weights));
        }
    }
    let four = PointSet::new(2, vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![1, -1]]).unwrap();
    let w = solve_scaling_sdp(&four, &full(2), DELTA).unwrap();
    let lo = w.c_sq.iter().cloned().fold(f64::INFINITY, f64::min);
    let norm: Vec<f64> = w.c_sq.iter().map(|c| c / lo).collect();
    let four_ok = norm.iter().zip([2.0, 2.0, 1.0, 1.0]).all(|(a, b)| ((a - b) / b).abs() <= 0.01);
    Outcome {
        pass: bad == 0 && four_ok,
        detail: format!(
            "{} weight vectors re-checked ({checked} solver, {ell} ellipsoid, {pieces} piece), {bad} failures; four-point weights {:?}",
            checked + ell + pieces,
            norm.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()
        ),
    }
}

fn decompositions() -> Vec<ForsterDecomposition> {
    (0..100)
        .map(|seed| {
            let mut r = rng(5000 + seed);
            let d = r.gen_range(2..=10);
            let n = r.gen_range(d..=500);
            let lim = (1i64 << r.gen_range(2..=20)) - 1;
            let pts = structured(&mut r, d, n, lim);
            forster_decompose(&pts, DELTA).unwrap()
        })
        .collect()
}

fn criterion_4(decs: &[ForsterDecomposition]) -> Outcome {
    let (mut bad, mut pieces, mut max_ratio) = (0, 0, 0.0f64);
    for dec in decs {
        let bound = piece_bound(dec.source.dim(), dec.source.len());
        pieces += dec.pieces.len();
        max_ratio = max_ratio.max(dec.pieces.len() as f64 / bound as f64);
        let certs = dec.pieces.iter().all(|p| {
            let rep = verify_piece(p, &dec.source);
            rep.pass && rep.distance <= DELTA + 1e-8 && (rep.trace - 1.0).abs() <= TRACE_TOL
        });
        bad += usize::from(!(dec.is_partition() && certs && dec.pieces.len() <= bound));
    }
    Outcome { pass: bad == 0, detail: format!("{} decompositions, {pieces} pieces, {bad} failures, max pieces/bound {max_ratio:.2}", decs.len()) }
}

fn criterion_5(decs: &[ForsterDecomposition]) -> Outcome {
    let mut r = rng(606);
    let (mut checks, mut violations, mut worst_gap) = (0, 0, f64::INFINITY);
    for dec in decs {
        for p in &dec.pieces {
            let k = p.dim();
            let mapped = p.mapped_members(&dec.source).unwrap();
            for _ in 0..100 {
                let v: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut r)).collect();
                let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                let thr = 1.0 / (2.0 * k as f64);
                let hit = mapped.iter().filter(|f| (f.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / nv).powi(2) >= thr).count();
                let frac = hit as f64 / mapped.len() as f64;
                checks += 1;
                worst_gap = worst_gap.min(frac - (thr - 2.0 * DELTA));
                violations += usize::from(frac < thr - 2.0 * DELTA);
            }
        }
    }
    Outcome { pass: violations == 0, detail: format!("{checks} piece/direction pairs, {violations} violations, smallest margin {worst_gap:.3e}") }
}

fn criterion_6() -> Outcome {
    let cfg = LearnerConfig::new(0.2, 0.05, 0.1).unwrap();
    let (mut good, mut slowest, mut worst) = (0, Duration::ZERO, 0.0f64);
    for seed in 0..20u64 {
        let mut r = rng(7000 + seed);
        let w: Vec<f64> = (0..10).map(|_| StandardNormal.sample(&mut r)).collect();
        let model = MassartModel::new(w, 0.2, NoiseRate::Constant { eta: 0.2 }, Marginal::DiscreteGaussian { dim: 10, bits: 16 }).unwrap();
        let t0 = Instant::now();
        let out = learn_halfspace(&mut MassartOracle::new(model.clone(), seed), &cfg);
        let el = t0.elapsed();
        slowest = slowest.max(el);
        if let Ok(out) = out {
            let test = massart_draw(&model, 100_000, 1_000_000 + seed).unwrap();
            let e = evaluate_classifier(&out.classifier, &test).total_error;
            worst = worst.max(e);
            good += usize::from(e <= 0.2 + 0.05 + 0.02 && el < Duration::from_secs(600));
        }
    }
    Outcome { pass: good >= 18, detail: format!("{good}/20 runs within 0.27, worst error {worst:.4}, slowest {:.1}s", slowest.as_secs_f64()) }
}

fn criterion_7() -> Outcome {
    let study = StudyConfig { dim: 10, bits: vec![16, 32, 48], eta: 0.2, eps: 0.05, delta: 0.1, trials: 10, seed: 8, test_size: 100_000 };
    let reports = match bit_independence_study(&study) {
        Ok(r) => r,
        Err(e) => return Outcome { pass: false, detail: format!("study failed: {e}") },
    };
    let spread = error_spread(&reports);
    let mut draws_equal = true;
    for t in 0..study.trials {
        let d: Vec<u64> = reports.iter().filter(|r| r.trial == t).map(|r| r.draws).collect();
        draws_equal &= d.windows(2).all(|w| w[0] == w[1]);
    }
    // Draw audit: a counting wrapper must agree with the learner's own count.
    let (model, _) = forster::dataset::gen_hard_instance(10, 1, 48, 0.2, 8).unwrap();
    let mut counted = CountingOracle::new(MassartOracle::new(model, 1));
    let audit = match learn_halfspace(&mut counted, &LearnerConfig::new(0.2, 0.05, 0.1).unwrap()) {
        Ok(o) => o.draws == counted.count(),
        Err(_) => false,
    };
    let means: Vec<String> = study
        .bits
        .iter()
        .map(|&b| {
            let e: Vec<f64> = reports.iter().filter(|r| r.bits == b).map(|r| r.error).collect();
            format!("b={b}: {:.4}", e.iter().sum::<f64>() / e.len() as f64)
        })
        .collect();
    Outcome {
        pass: spread <= 0.02 && draws_equal && audit,
        detail: format!("mean errors [{}], spread {spread:.4}, draws identical across b: {draws_equal}, draw audit: {audit}", means.join(", ")),
    }
}

fn invertible(r: &mut ChaCha8Rng, d: usize) -> Vec<Vec<i64>> {
    basis(r, d, d, 2)
}

fn apply(g: &[Vec<i64>], p: &[i64]) -> Vec<i64> {
    g.iter().map(|row| row.iter().zip(p).map(|(a, b)| a * b).sum()).collect()
}

fn members(dec: &ForsterDecomposition) -> Vec<Vec<usize>> {
    dec.pieces.iter().map(|p| p.members.clone()).collect()
}

fn criterion_8() -> Outcome {
    let mut bad = 0;
    for seed in 0..50 {
        let mut r = rng(8000 + seed);
        let d = r.gen_range(2..=5);
        let n = r.gen_range(d..=60);
        let pts = structured(&mut r, d, n, 20);
        let scaled = PointSet::new(d, pts.points().iter().map(|p| {
            let s = r.gen_range(1..=7);
            p.iter().map(|c| c * s).collect()
        }).collect()).unwrap();
        let g = invertible(&mut r, d);
        let mapped = PointSet::new(d, pts.points().iter().map(|p| apply(&g, p)).collect()).unwrap();
        let space = full(d);
        let base = find_heavy_subspace(&pts, &space).unwrap();
        let base_dec = members(&forster_decompose(&pts, DELTA).unwrap());
        for other in [&scaled, &mapped] {
            let h = find_heavy_subspace(other, &space).unwrap();
            let same_heavy = h.found == base.found && h.members == base.members;
            let same_dec = members(&forster_decompose(other, DELTA).unwrap()) == base_dec;
            bad += usize::from(!(same_heavy && same_dec));
        }
    }
    Outcome { pass: bad == 0, detail: format!("50 instances x 2 transformations, {bad} mismatches") }
}

fn report(n: usize, name: &str, o: &Outcome, t: Duration) -> bool {
    println!("criterion {n} [{name}]: {} ({}; {:.1}s)", if o.pass { "PASS" } else { "FAIL" }, o.detail, t.as_secs_f64());
    o.pass
}

fn main() -> ExitCode {
    let mut all = true;
    let timed = |f: &dyn Fn() -> Outcome| {
        let t0 = Instant::now();
        let o = f();
        (o, t0.elapsed())
    };
    let (o, t) = timed(&criterion_1);
    all &= report(1, "transform certificate", &o, t);
    let (o, t) = timed(&criterion_2);
    all &= report(2, "heavy-subspace exactness", &o, t);
    let (o, t) = timed(&criterion_3);
    all &= report(3, "scaling-weight certificate", &o, t);
    let t0 = Instant::now();
    let decs = decompositions();
    let build = t0.elapsed();
    let (o, t) = timed(&|| criterion_4(&decs));
    all &= report(4, "decomposition structure", &o, t + build);
    let (o, t) = timed(&|| criterion_5(&decs));
    all &= report(5, "anti-concentration", &o, t);
    let (o, t) = timed(&criterion_6);
    all &= report(6, "learning guarantee", &o, t);
    let (o, t) = timed(&criterion_7);
    all &= report(7, "bit-complexity independence", &o, t);
    let (o, t) = timed(&criterion_8);
    all &= report(8, "equivariance", &o, t);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
