use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::hard::HardMarginal;
use super::rng::substream;
use super::{DatasetError, LabeledDataset, PointSet};

/// Per-point flip probability η(x).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseRate {
    Constant { eta: f64 },
    /// η·(1 − |w*·x|/‖x‖): noisiest next to the decision boundary.
    MarginDecay { eta: f64 },
    /// Rate per support point; only valid with a uniform marginal.
    Table { rates: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub scales: Vec<f64>,
}

/// Distribution of the unlabeled points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Marginal {
    Uniform { points: Vec<Vec<i64>> },
    /// Standard Gaussian rounded to the grid `2^bits / 8`.
    DiscreteGaussian { dim: usize, bits: u32 },
    /// Mixture of axis-scaled Gaussians, rounded like `DiscreteGaussian`.
    LogConcaveMixture { dim: usize, bits: u32, components: Vec<MixtureComponent> },
    Hard(HardMarginal),
}

fn round_to_grid(v: &[f64], bits: u32) -> Vec<i64> {
    let scale = (bits as f64 - 3.0).exp2();
    let lim = ((1u64 << bits) - 1) as f64;
    v.iter().map(|&a| (a * scale).round().clamp(-lim, lim) as i64).collect()
}

impl Marginal {
    pub fn dim(&self) -> usize {
        match self {
            Marginal::Uniform { points } => points.first().map_or(0, Vec::len),
            Marginal::DiscreteGaussian { dim, .. } | Marginal::LogConcaveMixture { dim, .. } => *dim,
            Marginal::Hard(h) => h.dim(),
        }
    }

    fn validate(&self) -> Result<(), DatasetError> {
        let bad = |m: &str| Err(DatasetError::InvalidModel(m.into()));
        match self {
            Marginal::Uniform { points } => {
                PointSet::new(self.dim(), points.clone())?;
                if points.is_empty() {
                    return bad("uniform marginal needs at least one point");
                }
            }
            Marginal::DiscreteGaussian { dim, bits } => {
                if *dim == 0 || !(4..=62).contains(bits) {
                    return bad("gaussian marginal needs dim >= 1 and bits in 4..=62");
                }
            }
            Marginal::LogConcaveMixture { dim, bits, components } => {
                if *dim == 0 || !(4..=62).contains(bits) || components.is_empty() {
                    return bad("mixture needs dim >= 1, bits in 4..=62 and components");
                }
                for c in components {
                    if c.mean.len() != *dim || c.scales.len() != *dim || !(c.weight > 0.0) {
                        return bad("mixture component shape");
                    }
                }
            }
            Marginal::Hard(h) => h.validate()?,
        }
        Ok(())
    }

    /// One point, plus its support index for finite marginals.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> (Vec<i64>, Option<usize>) {
        match self {
            Marginal::Uniform { points } => {
                let i = rng.gen_range(0..points.len());
                (points[i].clone(), Some(i))
            }
            Marginal::DiscreteGaussian { dim, bits } => loop {
                let g: Vec<f64> = (0..*dim).map(|_| StandardNormal.sample(rng)).collect();
                let x = round_to_grid(&g, *bits);
                if x.iter().any(|&c| c != 0) {
                    return (x, None);
                }
            },
            Marginal::LogConcaveMixture { dim, bits, components } => {
                let total: f64 = components.iter().map(|c| c.weight).sum();
                loop {
                    let mut u = rng.gen::<f64>() * total;
                    let comp = components
                        .iter()
                        .find(|c| {
                            u -= c.weight;
                            u < 0.0
                        })
                        .unwrap_or(&components[components.len() - 1]);
                    let g: Vec<f64> = (0..*dim)
                        .map(|j| {
                            let z: f64 = StandardNormal.sample(rng);
                            comp.mean[j] + comp.scales[j] * z
                        })
                        .collect();
                    let x = round_to_grid(&g, *bits);
                    if x.iter().any(|&c| c != 0) {
                        return (x, None);
                    }
                }
            }
            Marginal::Hard(h) => (h.sample(rng), None),
        }
    }
}

/// Halfspace `sign(w*·x)` with Massart label noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassartModel {
    pub w_star: Vec<f64>,
    pub eta_bound: f64,
    pub noise: NoiseRate,
    pub marginal: Marginal,
}

impl MassartModel {
    /// Validates the model; `w_star` is normalized to unit length.
    pub fn new(w_star: Vec<f64>, eta_bound: f64, noise: NoiseRate, marginal: Marginal) -> Result<Self, DatasetError> {
        let bad = |m: &str| Err(DatasetError::InvalidModel(m.into()));
        let nw = w_star.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !(nw > 0.0) || !nw.is_finite() {
            return bad("w_star must be a nonzero finite vector");
        }
        if w_star.len() != marginal.dim() {
            return bad("w_star and marginal dimensions differ");
        }
        if !(0.0..0.5).contains(&eta_bound) {
            return bad("eta_bound must lie in [0, 1/2)");
        }
        marginal.validate()?;
        match &noise {
            NoiseRate::Constant { eta } | NoiseRate::MarginDecay { eta } => {
                if !(0.0..=eta_bound).contains(eta) {
                    return bad("noise rate exceeds eta_bound");
                }
            }
            NoiseRate::Table { rates } => {
                let Marginal::Uniform { points } = &marginal else {
                    return bad("table noise needs a uniform marginal");
                };
                if rates.len() != points.len() || rates.iter().any(|r| !(0.0..=eta_bound).contains(r)) {
                    return bad("noise table must give one rate in [0, eta_bound] per support point");
                }
            }
        }
        let w_star = w_star.iter().map(|a| a / nw).collect();
        Ok(Self { w_star, eta_bound, noise, marginal })
    }

    pub fn dim(&self) -> usize {
        self.w_star.len()
    }

    /// `sign(w*·x)` with `sign(0) = +1`.
    pub fn clean_label(&self, x: &[i64]) -> i8 {
        let s: f64 = self.w_star.iter().zip(x).map(|(w, &c)| w * c as f64).sum();
        if s >= 0.0 {
            1
        } else {
            -1
        }
    }

    pub fn flip_rate(&self, x: &[i64], support: Option<usize>) -> f64 {
        match &self.noise {
            NoiseRate::Constant { eta } => *eta,
            NoiseRate::MarginDecay { eta } => {
                let s: f64 = self.w_star.iter().zip(x).map(|(w, &c)| w * c as f64).sum();
                let nx = x.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>().sqrt();
                eta * (1.0 - (s.abs() / nx).min(1.0))
            }
            NoiseRate::Table { rates } => support.map_or(0.0, |i| rates[i]),
        }
    }

    /// Example number `index` of the stream keyed by `seed`.
    pub fn draw(&self, seed: u64, index: u64) -> (Vec<i64>, i8) {
        let mut rng = substream(seed, index);
        let (x, support) = self.marginal.sample(&mut rng);
        let u: f64 = rng.gen();
        let y = self.clean_label(&x);
        let y = if u < self.flip_rate(&x, support) { -y } else { y };
        (x, y)
    }
}

/// `n` i.i.d. labeled examples; example `i` depends only on `(seed, i)`.
pub fn massart_draw(model: &MassartModel, n: usize, seed: u64) -> Result<LabeledDataset, DatasetError> {
    if n == 0 {
        return Err(DatasetError::Empty);
    }
    let (points, labels): (Vec<_>, Vec<_>) = (0..n as u64).map(|i| model.draw(seed, i)).unzip();
    LabeledDataset::new(PointSet::new(model.dim(), points)?, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(dim: usize, eta: f64) -> MassartModel {
        let w = (0..dim).map(|i| 1.0 + i as f64).collect();
        MassartModel::new(w, 0.49, NoiseRate::Constant { eta }, Marginal::DiscreteGaussian { dim, bits: 20 }).unwrap()
    }

    #[test]
    fn noiseless_labels_follow_halfspace() {
        let m = gaussian(3, 0.0);
        let data = massart_draw(&m, 2000, 1).unwrap();
        assert!(data.iter().all(|(x, y)| y == m.clean_label(x)));
    }

    #[test]
    fn boundary_point_gets_plus_one() {
        let m = MassartModel::new(
            vec![1.0, -1.0],
            0.3,
            NoiseRate::Constant { eta: 0.0 },
            Marginal::Uniform { points: vec![vec![3, 3]] },
        )
        .unwrap();
        let data = massart_draw(&m, 10, 0).unwrap();
        assert!(data.labels().iter().all(|&y| y == 1));
    }

    #[test]
    fn flip_fraction_matches_rate() {
        let m = gaussian(4, 0.2);
        let data = massart_draw(&m, 100_000, 9).unwrap();
        let flips = data.iter().filter(|&(x, y)| y != m.clean_label(x)).count();
        let frac = flips as f64 / 100_000.0;
        assert!((frac - 0.2).abs() <= 0.01, "flip fraction {frac}");
    }

    #[test]
    fn draws_are_reproducible() {
        let m = gaussian(5, 0.1);
        let a = massart_draw(&m, 300, 4).unwrap();
        let b = massart_draw(&m, 300, 4).unwrap();
        assert_eq!(a, b);
        let c = massart_draw(&m, 300, 5).unwrap();
        assert_ne!(a, c);
        // Example i does not depend on how many examples are drawn.
        let short = massart_draw(&m, 10, 4).unwrap();
        assert_eq!(short.base().points(), &a.base().points()[..10]);
    }

    #[test]
    fn invalid_models_rejected() {
        let marg = Marginal::DiscreteGaussian { dim: 2, bits: 10 };
        assert!(MassartModel::new(vec![0.0, 0.0], 0.1, NoiseRate::Constant { eta: 0.1 }, marg.clone()).is_err());
        assert!(MassartModel::new(vec![1.0, 0.0], 0.5, NoiseRate::Constant { eta: 0.1 }, marg.clone()).is_err());
        assert!(MassartModel::new(vec![1.0, 0.0], 0.1, NoiseRate::Constant { eta: 0.2 }, marg.clone()).is_err());
        assert!(MassartModel::new(vec![1.0, 0.0], 0.1, NoiseRate::Table { rates: vec![0.1] }, marg).is_err());
    }

    #[test]
    fn table_and_margin_rates() {
        let pts = vec![vec![1, 0], vec![1, 1]];
        let m = MassartModel::new(
            vec![1.0, 0.0],
            0.4,
            NoiseRate::Table { rates: vec![0.0, 0.4] },
            Marginal::Uniform { points: pts },
        )
        .unwrap();
        let data = massart_draw(&m, 20_000, 2).unwrap();
        let mut flips = [0usize; 2];
        let mut seen = [0usize; 2];
        for (x, y) in data.iter() {
            let i = usize::from(x[1] == 1);
            seen[i] += 1;
            flips[i] += usize::from(y != 1);
        }
        assert_eq!(flips[0], 0);
        let f = flips[1] as f64 / seen[1] as f64;
        assert!((f - 0.4).abs() < 3.0 * (0.24f64 / seen[1] as f64).sqrt() + 1e-3);

        let md = MassartModel::new(vec![1.0, 0.0], 0.3, NoiseRate::MarginDecay { eta: 0.3 }, Marginal::DiscreteGaussian { dim: 2, bits: 8 }).unwrap();
        assert_eq!(md.flip_rate(&[5, 0], None), 0.0);
        assert!((md.flip_rate(&[0, 5], None) - 0.3).abs() < 1e-15);
    }
}
