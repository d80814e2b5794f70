//! Halfspace learning under Massart noise: repeatedly condition on the region
//! the current partial classifier abstains on, Forster-transform a sample of
//! it, and append a band rule learned on the transformed points.

mod classifier;
mod outlier;
mod weak;

pub use classifier::{evaluate_classifier, ClassifierRecord, Evaluation, PartialClassifier, Stage, StageRecord};
pub use outlier::outlier_bound;
pub use weak::{weak_partial_learner, BandRule, GD_STEPS};

use serde::{Deserialize, Serialize};

use crate::dataset::{ExampleOracle, PointSet};
use crate::transform::{forster_transform, TransformError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LearnerError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("second-moment matrix is singular")]
    DegenerateSecondMoment,
    #[error("no band reaches the coverage floor (best validation error {best_error})")]
    CoverageFailure { best_error: f64 },
    #[error("too few samples for the weak learner")]
    TooFewSamples,
    #[error("outlier bound {gamma} exceeds {limit}")]
    OutlierBoundExceeded { gamma: f64, limit: f64 },
    #[error("iteration cap {cap} exceeded")]
    IterationCapExceeded { cap: usize },
    #[error("malformed classifier: {0}")]
    Malformed(String),
    #[error("forster certificate too weak: lambda_min {lambda_min} < {required}")]
    WeakCertificate { lambda_min: f64, required: f64 },
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// Learner parameters. Every sample size depends on the dimension and
/// `(ε, δ)` only, never on the bit complexity of the examples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub eta: f64,
    pub eps: f64,
    pub delta: f64,
    /// Constant of the check sample `C·ln(dε/δ)/ε²`.
    pub c: f64,
    /// Constant of the Forster sample `c_F·d⁴·ln(1/δ)`.
    pub forster_c: f64,
    /// Constant of the weak-learner sample `c_W·(k + ln(1/δ′))/ε′²`.
    pub weak_c: f64,
    /// Relaxation used for the Forster transform of each sample.
    pub forster_delta: f64,
    pub coverage_floor: f64,
    /// Rejection budget per accepted draw, in units of `1/ε`.
    pub rejection_factor: f64,
}

impl LearnerConfig {
    pub fn new(eta: f64, eps: f64, delta: f64) -> Result<Self, LearnerError> {
        let cfg = Self { eta, eps, delta, c: 64.0, forster_c: 0.25, weak_c: 1.0, forster_delta: 1e-2, coverage_floor: 1e-3, rejection_factor: 12.0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), LearnerError> {
        let bad = |m: &str| Err(LearnerError::InvalidConfig(m.into()));
        if !(0.0..0.5).contains(&self.eta) {
            return bad("eta must lie in [0, 1/2)");
        }
        if !(self.eps > 0.0 && self.eps < 1.0) || !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("eps and delta must lie in (0, 1)");
        }
        if !(self.c > 0.0 && self.forster_c > 0.0 && self.weak_c > 0.0 && self.rejection_factor >= 1.0) {
            return bad("sample constants must be positive");
        }
        if !(self.forster_delta > 0.0 && self.forster_delta < 1.0) || !(self.coverage_floor > 0.0 && self.coverage_floor < 1.0) {
            return bad("forster_delta and coverage_floor must lie in (0, 1)");
        }
        Ok(())
    }

    pub fn eps_prime(&self) -> f64 {
        self.eps / 2.0
    }

    /// `Γ = 4·dim(V)`.
    pub fn gamma(&self, k: usize) -> f64 {
        4.0 * k as f64
    }

    /// `⌈(48d/ε)·ln(6/ε)⌉·(1 + ⌈ln(1/δ)⌉)`.
    pub fn iteration_cap(&self, d: usize) -> usize {
        let base = (48.0 * d as f64 / self.eps * (6.0 / self.eps).ln()).ceil() as usize;
        base * (1 + (1.0 / self.delta).ln().ceil() as usize)
    }

    pub fn delta_prime(&self, d: usize) -> f64 {
        self.delta / (d as f64 * self.iteration_cap(d) as f64 * 100.0)
    }

    /// The logarithm is floored at 1 so the size stays positive when `dε ≤ δ`.
    pub fn check_sample_size(&self, d: usize) -> usize {
        let l = (d as f64 * self.eps / self.delta).ln().max(1.0);
        (self.c * l / (self.eps * self.eps)).ceil() as usize
    }

    pub fn forster_sample_size(&self, d: usize) -> usize {
        (self.forster_c * (d as f64).powi(4) * (1.0 / self.delta).ln()).ceil().max(1.0) as usize
    }

    pub fn weak_sample_size(&self, k: usize, d: usize) -> usize {
        let ep = self.eps_prime();
        (self.weak_c * (k as f64 + (1.0 / self.delta_prime(d)).ln()) / (ep * ep)).ceil() as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationTelemetry {
    pub iteration: usize,
    /// Abstention rate of the classifier before this iteration, on a fresh check sample.
    pub check_uncovered: f64,
    pub piece_dim: usize,
    pub piece_members: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub gamma: f64,
    pub weak_samples: usize,
    pub val_error: f64,
    pub val_coverage: f64,
    pub threshold: f64,
    /// Oracle draws consumed up to the end of this iteration.
    pub draws: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitReason {
    /// The check sample's abstention rate fell to `ε/3`.
    Covered,
    /// Conditioned sampling ran out of budget, so little mass is left uncovered.
    RejectionBudget,
}

#[derive(Clone, Debug)]
pub struct LearnOutcome {
    pub classifier: PartialClassifier,
    pub telemetry: Vec<IterationTelemetry>,
    /// Final check-sample abstention rate (`None` when the loop ended on the rejection budget).
    pub final_uncovered: Option<f64>,
    pub draws: u64,
    pub exit: ExitReason,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelRecord {
    pub classifier: ClassifierRecord,
    pub config: LearnerConfig,
    pub telemetry: Vec<IterationTelemetry>,
    pub final_uncovered: Option<f64>,
    pub draws: u64,
    pub exit: ExitReason,
}

impl LearnOutcome {
    pub fn to_record(&self, config: &LearnerConfig) -> ModelRecord {
        ModelRecord {
            classifier: self.classifier.to_record(),
            config: config.clone(),
            telemetry: self.telemetry.clone(),
            final_uncovered: self.final_uncovered,
            draws: self.draws,
            exit: self.exit,
        }
    }
}

struct Counted<'a, O: ?Sized> {
    oracle: &'a mut O,
    draws: u64,
}

impl<O: ExampleOracle + ?Sized> Counted<'_, O> {
    fn draw(&mut self) -> (Vec<i64>, i8) {
        self.draws += 1;
        self.oracle.draw()
    }

    /// Draws until `count` examples pass `accept`, or `None` once `budget`
    /// draws are spent.
    fn conditioned(&mut self, count: usize, budget: u64, accept: impl Fn(&[i64]) -> bool) -> Option<Vec<(Vec<i64>, i8)>> {
        let mut out = Vec::with_capacity(count);
        let mut spent = 0u64;
        while out.len() < count {
            if spent == budget {
                return None;
            }
            spent += 1;
            let (x, y) = self.draw();
            if accept(&x) {
                out.push((x, y));
            }
        }
        Some(out)
    }
}

/// Runs the iterative learner against `oracle` and returns the chained partial
/// classifier; abstentions are resolved to +1 by [`PartialClassifier::predict_total`].
pub fn learn_halfspace<O: ExampleOracle + ?Sized>(oracle: &mut O, config: &LearnerConfig) -> Result<LearnOutcome, LearnerError> {
    config.validate()?;
    let d = oracle.dim();
    let mut src = Counted { oracle, draws: 0 };
    let mut h = PartialClassifier::new(d);
    let mut telemetry = Vec::new();
    let cap = config.iteration_cap(d);
    let per_accept = config.rejection_factor / config.eps;
    let n_check = config.check_sample_size(d);
    let n_forster = config.forster_sample_size(d);

    for iteration in 0.. {
        let mut abstain = 0usize;
        for _ in 0..n_check {
            let (x, _) = src.draw();
            abstain += h.predict(&x).is_none() as usize;
        }
        let uncovered = abstain as f64 / n_check as f64;
        if uncovered <= config.eps / 3.0 {
            return Ok(LearnOutcome { classifier: h, telemetry, final_uncovered: Some(uncovered), draws: src.draws, exit: ExitReason::Covered });
        }
        if iteration == cap {
            return Err(LearnerError::IterationCapExceeded { cap });
        }
        let budget = (per_accept * n_forster as f64).ceil() as u64;
        let Some(sample) = src.conditioned(n_forster, budget, |x| h.predict(x).is_none()) else {
            return Ok(LearnOutcome { classifier: h, telemetry, final_uncovered: None, draws: src.draws, exit: ExitReason::RejectionBudget });
        };
        let points = PointSet::new(d, sample.into_iter().map(|(x, _)| x).collect()).map_err(|e| LearnerError::InvalidConfig(e.to_string()))?;
        let piece = forster_transform(&points, config.forster_delta)?;
        let k = piece.dim();
        let required = 1.0 / (2.0 * k as f64);
        if piece.certificate.lambda_min < required {
            return Err(LearnerError::WeakCertificate { lambda_min: piece.certificate.lambda_min, required });
        }

        let n_weak = config.weak_sample_size(k, d);
        let budget = (per_accept * (d as f64 / k as f64) * n_weak as f64).ceil() as u64;
        let Some(weak) = src.conditioned(n_weak, budget, |x| piece.contains(x) && h.predict(x).is_none()) else {
            return Ok(LearnOutcome { classifier: h, telemetry, final_uncovered: None, draws: src.draws, exit: ExitReason::RejectionBudget });
        };
        let mapped: Vec<Vec<f64>> = weak.iter().map(|(x, _)| piece.map(x)).collect::<Result<_, _>>()?;
        let labels: Vec<i8> = weak.iter().map(|(_, y)| *y).collect();
        let rule = weak_partial_learner(&mapped, &labels, config.eta, config.gamma(k), config.eps_prime(), config.coverage_floor)?;
        telemetry.push(IterationTelemetry {
            iteration,
            check_uncovered: uncovered,
            piece_dim: k,
            piece_members: piece.members.len(),
            lambda_min: piece.certificate.lambda_min,
            lambda_max: piece.certificate.lambda_max,
            gamma: rule.gamma,
            weak_samples: n_weak,
            val_error: rule.val_error,
            val_coverage: rule.val_coverage,
            threshold: rule.threshold,
            draws: src.draws,
        });
        h.push(Stage::from_piece(&piece, rule.w, rule.threshold)?)?;
    }
    unreachable!("the loop only exits by returning")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{massart_draw, Marginal, MassartModel, MassartOracle, NoiseRate};

    #[test]
    fn config_sizes() {
        let c = LearnerConfig::new(0.2, 0.05, 0.1).unwrap();
        assert_eq!(c.forster_sample_size(10), 5757);
        assert_eq!(c.check_sample_size(10), (64.0 * 5f64.ln() / 0.0025f64).ceil() as usize);
        let t = c.iteration_cap(10);
        assert_eq!(t, (9600.0 * 120f64.ln()).ceil() as usize * 4);
        assert!((c.delta_prime(10) - 0.1 / (10.0 * t as f64 * 100.0)).abs() < 1e-20);
        assert!(LearnerConfig::new(0.5, 0.05, 0.1).is_err());
        assert!(LearnerConfig::new(0.1, 0.0, 0.1).is_err());
    }

    #[test]
    fn noiseless_plane() {
        let model = MassartModel::new(vec![0.6, -0.8], 0.0, NoiseRate::Constant { eta: 0.0 }, Marginal::DiscreteGaussian { dim: 2, bits: 16 }).unwrap();
        let mut cfg = LearnerConfig::new(0.0, 0.1, 0.1).unwrap();
        cfg.forster_c = 20.0;
        let out = learn_halfspace(&mut MassartOracle::new(model.clone(), 3), &cfg).unwrap();
        let test = massart_draw(&model, 20_000, 99).unwrap();
        let e = evaluate_classifier(&out.classifier, &test);
        let total = test.iter().filter(|(x, y)| out.classifier.predict_total(x) != *y).count() as f64 / test.len() as f64;
        assert_eq!(total, e.total_error);
        assert!(e.total_error <= 0.1, "{e:?}");
    }

    #[test]
    fn one_line_marginal() {
        let pts: Vec<Vec<i64>> = (1..=20).map(|i| vec![3 * i, -i]).chain((1..=20).map(|i| vec![-3 * i, i])).collect();
        let model = MassartModel::new(vec![1.0, 0.0], 0.1, NoiseRate::Constant { eta: 0.1 }, Marginal::Uniform { points: pts }).unwrap();
        let cfg = LearnerConfig::new(0.1, 0.1, 0.1).unwrap();
        let out = learn_halfspace(&mut MassartOracle::new(model, 5), &cfg).unwrap();
        assert_eq!(out.telemetry.len(), 1);
        assert_eq!(out.telemetry[0].piece_dim, 1);
        assert_eq!(out.final_uncovered, Some(0.0));
    }
}
