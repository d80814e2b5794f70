use serde::Serialize;

use crate::linalg::{dot, norm};

use super::outlier::outlier_bound;
use super::LearnerError;

/// Gradient steps on the surrogate loss.
pub const GD_STEPS: usize = 300;

/// A single band rule learned on mapped (unit-norm) points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandRule {
    pub w: Vec<f64>,
    pub threshold: f64,
    pub val_error: f64,
    pub val_coverage: f64,
    pub gamma: f64,
}

fn sign(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

/// Mean of `max((1−λ)z, λz)` with `z = −y·(w·x)`, and its subgradient.
fn leaky_loss(points: &[Vec<f64>], labels: &[i8], w: &[f64], leak: f64) -> (f64, Vec<f64>) {
    let mut loss = 0.0;
    let mut grad = vec![0.0; w.len()];
    for (x, &y) in points.iter().zip(labels) {
        let yf = y as f64;
        let z = -yf * dot(w, x);
        let slope = if z > 0.0 { 1.0 - leak } else { leak };
        loss += slope * z;
        grad.iter_mut().zip(x).for_each(|(g, &xi)| *g -= slope * yf * xi);
    }
    let m = points.len() as f64;
    grad.iter_mut().for_each(|g| *g /= m);
    (loss / m, grad)
}

/// LeakyReLU minimization over the unit ball, then the widest band
/// `|w·x| ≥ t` whose validation error stays below `η + ε′ − ε′/8`.
///
/// The first half of the sample trains, the second half validates.
pub fn weak_partial_learner(
    points: &[Vec<f64>],
    labels: &[i8],
    eta: f64,
    gamma: f64,
    eps_prime: f64,
    coverage_floor: f64,
) -> Result<BandRule, LearnerError> {
    if points.len() < 2 || points.len() != labels.len() {
        return Err(LearnerError::TooFewSamples);
    }
    let g = outlier_bound(points)?;
    if g > gamma {
        return Err(LearnerError::OutlierBoundExceeded { gamma: g, limit: gamma });
    }
    let half = points.len() / 2;
    let (train, val) = points.split_at(half);
    let (ytrain, yval) = labels.split_at(half);
    let k = points[0].len();
    let leak = eta + eps_prime / 4.0;

    let mut w = vec![0.0; k];
    for (x, &y) in train.iter().zip(ytrain) {
        w.iter_mut().zip(x).for_each(|(a, &b)| *a += y as f64 * b);
    }
    let nw = norm(&w);
    if nw > 0.0 {
        w.iter_mut().for_each(|a| *a /= nw);
    } else {
        w[0] = 1.0;
    }
    let (mut best_loss, mut grad) = leaky_loss(train, ytrain, &w, leak);
    let mut best = w.clone();
    for t in 1..=GD_STEPS {
        let step = 1.0 / (t as f64).sqrt();
        w.iter_mut().zip(&grad).for_each(|(a, g)| *a -= step * g);
        let nw = norm(&w);
        if nw > 1.0 {
            w.iter_mut().for_each(|a| *a /= nw);
        }
        let (loss, gr) = leaky_loss(train, ytrain, &w, leak);
        grad = gr;
        if loss < best_loss {
            best_loss = loss;
            best.clone_from(&w);
        }
    }
    let nb = norm(&best);
    if nb > 0.0 {
        best.iter_mut().for_each(|a| *a /= nb);
    }

    let target = eta + eps_prime - eps_prime / 8.0;
    let mut scored: Vec<(f64, bool)> = val.iter().zip(yval).map(|(x, &y)| {
        let s = dot(&best, x);
        (s.abs(), sign(s) != y)
    }).collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let m = scored.len();
    let min_len = ((coverage_floor * m as f64).ceil() as usize).max(1);
    let mut wrong = vec![0usize; m + 1];
    for (i, s) in scored.iter().enumerate() {
        wrong[i + 1] = wrong[i] + s.1 as usize;
    }
    let mut best_err = f64::INFINITY;
    for len in (min_len..=m).rev() {
        // Only cut between distinct scores so the band is well defined.
        if len < m && scored[len].0 == scored[len - 1].0 {
            continue;
        }
        let err = wrong[len] as f64 / len as f64;
        best_err = best_err.min(err);
        if err < target {
            return Ok(BandRule { w: best, threshold: scored[len - 1].0, val_error: err, val_coverage: len as f64 / m as f64, gamma: g });
        }
    }
    Err(LearnerError::CoverageFailure { best_error: best_err })
}
