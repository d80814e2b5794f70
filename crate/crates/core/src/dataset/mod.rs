//! Point sets, labeled samples, file formats, synthetic marginals and the
//! simulated Massart example oracle.

mod hard;
pub mod io;
mod model;
mod oracle;
mod pointset;
pub mod rng;

pub use hard::{gen_hard_instance, HardMarginal, HARD_BASE_BITS};
pub use io::{load_labeled, load_points, write_csv, write_json, Format};
pub use model::{massart_draw, Marginal, MassartModel, MixtureComponent, NoiseRate};
pub use oracle::{CountingOracle, DatasetOracle, ExampleOracle, MassartOracle};
pub use pointset::{bit_length, LabeledDataset, PointSet};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: zero vector is not allowed")]
    ZeroPoint { line: usize },
    #[error("line {line}: coordinate is not an integer")]
    NonInteger { line: usize },
    #[error("line {line}: expected {expected} coordinates, found {found}")]
    DimensionMismatch { line: usize, expected: usize, found: usize },
    #[error("{points} points but {labels} labels")]
    LengthMismatch { points: usize, labels: usize },
    #[error("line {line}: label must be -1 or 1")]
    InvalidLabel { line: usize },
    #[error("file has no label column")]
    MissingLabels,
    #[error("no points")]
    Empty,
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("i/o: {0}")]
    Io(String),
}
