//! Synthetic instances with badly mixed scales.
//!
//! Base directions have at most `HARD_BASE_BITS` bits and are shared across
//! every `bits` setting; each point is then multiplied by a random power of two
//! so that coordinates reach `2^bits`. Forty percent of the mass sits exactly on
//! a low-dimensional subspace, thirty percent within one unit of another one.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::model::{massart_draw, Marginal, MassartModel, NoiseRate};
use super::rng::{derive_seed, substream};
use super::{DatasetError, LabeledDataset};
use crate::linalg::exact::exact_rank;

pub const HARD_BASE_BITS: u32 = 10;

const EXACT_WEIGHT: f64 = 0.4;
const NEAR_WEIGHT: f64 = 0.3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardMarginal {
    pub bits: u32,
    pub base_bits: u32,
    pub exact_basis: Vec<Vec<i64>>,
    pub near_basis: Vec<Vec<i64>>,
    pub coef_bound: i64,
}

fn combination(rng: &mut ChaCha8Rng, basis: &[Vec<i64>], c: i64, dim: usize) -> Vec<i64> {
    let mut z = vec![0i64; dim];
    for b in basis {
        let t = rng.gen_range(-c..=c);
        z.iter_mut().zip(b).for_each(|(zi, &bi)| *zi += t * bi);
    }
    z
}

impl HardMarginal {
    pub fn dim(&self) -> usize {
        self.exact_basis.first().map_or(0, Vec::len)
    }

    pub(super) fn validate(&self) -> Result<(), DatasetError> {
        let ok = self.bits >= 4
            && self.bits <= 62
            && self.base_bits <= self.bits
            && !self.exact_basis.is_empty()
            && self.near_basis.len() == self.exact_basis.len()
            && self.coef_bound >= 1;
        if ok {
            Ok(())
        } else {
            Err(DatasetError::InvalidModel("malformed hard marginal".into()))
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<i64> {
        let dim = self.dim();
        let lim = (1i64 << self.base_bits) - 1;
        let u: f64 = rng.gen();
        let scale_draw: f64 = rng.gen();
        let z = loop {
            let z = if u < EXACT_WEIGHT {
                combination(rng, &self.exact_basis, self.coef_bound, dim)
            } else if u < EXACT_WEIGHT + NEAR_WEIGHT {
                let mut z = combination(rng, &self.near_basis, self.coef_bound, dim);
                let j = rng.gen_range(0..dim);
                z[j] += if rng.gen::<bool>() { 1 } else { -1 };
                z
            } else {
                (0..dim).map(|_| rng.gen_range(-lim..=lim)).collect()
            };
            if z.iter().any(|&c| c != 0) {
                break z;
            }
        };
        let levels = self.bits - self.base_bits;
        let e = ((scale_draw * (levels + 1) as f64) as u32).min(levels);
        z.into_iter().map(|c| c << e).collect()
    }
}

fn random_basis(rng: &mut ChaCha8Rng, dim: usize, rank: usize, a: i64) -> Vec<Vec<i64>> {
    loop {
        let b: Vec<Vec<i64>> = (0..rank).map(|_| (0..dim).map(|_| rng.gen_range(-a..=a)).collect()).collect();
        if exact_rank(dim, &b) == rank {
            return b;
        }
    }
}

/// Hard instance with constant label noise `eta`.
///
/// The structure (subspaces, `w*`) and the per-example random draws depend
/// only on `seed`, never on `bits` (for `bits ≥ HARD_BASE_BITS`), so instances
/// that differ only in `bits` have identical point directions and labels.
pub fn gen_hard_instance(
    dim: usize,
    n: usize,
    bits: u32,
    eta: f64,
    seed: u64,
) -> Result<(MassartModel, LabeledDataset), DatasetError> {
    if dim == 0 || !(4..=62).contains(&bits) {
        return Err(DatasetError::InvalidModel("hard instance needs dim >= 1 and bits in 4..=62".into()));
    }
    let base_bits = bits.min(HARD_BASE_BITS);
    let rank = if dim == 1 { 1 } else { ((3 * dim + 5) / 10).clamp(1, dim - 1) };
    let a = 1i64 << (base_bits / 2 - 1);
    // Leaves room for the ±1 nudge so coordinates keep at most `base_bits` bits.
    let coef_bound = (((1i64 << base_bits) - 2) / (rank as i64 * a)).max(1);

    let mut rng = substream(seed, u64::MAX);
    let exact_basis = random_basis(&mut rng, dim, rank, a);
    let near_basis = random_basis(&mut rng, dim, rank, a);
    let w_star: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();

    let marginal = Marginal::Hard(HardMarginal { bits, base_bits, exact_basis, near_basis, coef_bound });
    let model = MassartModel::new(w_star, eta, NoiseRate::Constant { eta }, marginal)?;
    let data = massart_draw(&model, n, derive_seed(seed, 1))?;
    Ok((model, data))
}
