//! Brute-force oracles and the bit-complexity study.

mod brute;
mod study;

pub use brute::{brute_force_heavy_subspace, BRUTE_MAX_DIM, BRUTE_MAX_POINTS};
pub use study::{bit_independence_study, error_spread, run_trial, write_study_csv, StudyConfig, TrialReport};

use crate::dataset::DatasetError;
use crate::heavy::HeavyError;
use crate::learner::LearnerError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("brute force limited to d <= 4 and n <= 12 (got d = {dim}, n = {n})")]
    SizeLimit { dim: usize, n: usize },
    #[error("counting oracle saw {counted} draws but the learner reported {reported}")]
    DrawMismatch { counted: u64, reported: u64 },
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Heavy(#[from] HeavyError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        Self::Io(e.to_string())
    }
}
