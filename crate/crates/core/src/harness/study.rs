use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::rng::derive_seed;
use crate::dataset::{gen_hard_instance, massart_draw, CountingOracle, MassartModel, MassartOracle};
use crate::learner::{evaluate_classifier, learn_halfspace, IterationTelemetry, LearnerConfig};

use super::HarnessError;

/// Outcome of one learner run against a simulated oracle.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialReport {
    pub seed: u64,
    pub bits: u32,
    pub trial: usize,
    pub config: LearnerConfig,
    pub telemetry: Vec<IterationTelemetry>,
    /// Held-out error with abstentions resolved to +1.
    pub error: f64,
    pub coverage: f64,
    /// Draws seen by the counting wrapper around the oracle.
    pub draws: u64,
    pub seconds: f64,
}

/// Runs the learner on `model` with oracle seed `seed`, then scores it on
/// `test_size` fresh draws from `test_seed`.
pub fn run_trial(model: &MassartModel, config: &LearnerConfig, seed: u64, test_seed: u64, test_size: usize) -> Result<TrialReport, HarnessError> {
    let start = Instant::now();
    let mut oracle = CountingOracle::new(MassartOracle::new(model.clone(), seed));
    let out = learn_halfspace(&mut oracle, config)?;
    if oracle.count() != out.draws {
        return Err(HarnessError::DrawMismatch { counted: oracle.count(), reported: out.draws });
    }
    let seconds = start.elapsed().as_secs_f64();
    let test = massart_draw(model, test_size, test_seed)?;
    let e = evaluate_classifier(&out.classifier, &test);
    Ok(TrialReport {
        seed,
        bits: 0,
        trial: 0,
        config: config.clone(),
        telemetry: out.telemetry,
        error: e.total_error,
        coverage: e.coverage,
        draws: oracle.count(),
        seconds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub dim: usize,
    pub bits: Vec<u32>,
    pub eta: f64,
    pub eps: f64,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    pub test_size: usize,
}

/// Learner runs on paired hard instances: trial `t` uses the same instance
/// seed, oracle seed and test seed for every entry of `bits`, so only the
/// coordinate scales differ. Reports are ordered by `(bits, trial)`.
pub fn bit_independence_study(cfg: &StudyConfig) -> Result<Vec<TrialReport>, HarnessError> {
    let learner = LearnerConfig::new(cfg.eta, cfg.eps, cfg.delta)?;
    let cells: Vec<(u32, usize)> = cfg.bits.iter().flat_map(|&b| (0..cfg.trials).map(move |t| (b, t))).collect();
    cells
        .par_iter()
        .map(|&(bits, trial)| {
            let s = derive_seed(cfg.seed, trial as u64);
            let (model, _) = gen_hard_instance(cfg.dim, 1, bits, cfg.eta, s)?;
            let mut r = run_trial(&model, &learner, derive_seed(s, 2), derive_seed(s, 3), cfg.test_size)?;
            r.bits = bits;
            r.trial = trial;
            Ok(r)
        })
        .collect()
}

/// Largest difference between the per-`b` mean errors.
pub fn error_spread(reports: &[TrialReport]) -> f64 {
    let mut by_bits: Vec<(u32, f64, usize)> = Vec::new();
    for r in reports {
        match by_bits.iter_mut().find(|c| c.0 == r.bits) {
            Some(c) => {
                c.1 += r.error;
                c.2 += 1;
            }
            None => by_bits.push((r.bits, r.error, 1)),
        }
    }
    let means: Vec<f64> = by_bits.iter().map(|c| c.1 / c.2 as f64).collect();
    let hi = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = means.iter().cloned().fold(f64::INFINITY, f64::min);
    if means.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

#[derive(Serialize)]
struct Row {
    b: u32,
    trial: usize,
    error: f64,
    coverage: f64,
    draws: u64,
    seconds: f64,
}

/// CSV with columns `b, trial, error, coverage, draws, seconds`.
pub fn write_study_csv<W: Write>(out: W, reports: &[TrialReport]) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["b", "trial", "error", "coverage", "draws", "seconds"])?;
    for r in reports {
        w.serialize(Row { b: r.bits, trial: r.trial, error: r.error, coverage: r.coverage, draws: r.draws, seconds: r.seconds })?;
    }
    w.flush().map_err(|e| HarnessError::Io(e.to_string()))?;
    Ok(())
}
