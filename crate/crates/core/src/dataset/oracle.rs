use rand::Rng;

use super::model::MassartModel;
use super::rng::substream;
use super::LabeledDataset;

/// Source of labeled examples, consumed sequentially by one learner.
pub trait ExampleOracle {
    fn dim(&self) -> usize;
    fn draw(&mut self) -> (Vec<i64>, i8);
}

/// Simulated Massart oracle: draw `i` is `model.draw(seed, i)`.
#[derive(Clone, Debug)]
pub struct MassartOracle {
    model: MassartModel,
    seed: u64,
    next: u64,
}

impl MassartOracle {
    pub fn new(model: MassartModel, seed: u64) -> Self {
        Self { model, seed, next: 0 }
    }

    pub fn model(&self) -> &MassartModel {
        &self.model
    }
}

impl ExampleOracle for MassartOracle {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn draw(&mut self) -> (Vec<i64>, i8) {
        let ex = self.model.draw(self.seed, self.next);
        self.next += 1;
        ex
    }
}

/// Uniform draws with replacement from a finite labeled sample.
#[derive(Clone, Debug)]
pub struct DatasetOracle {
    data: LabeledDataset,
    seed: u64,
    next: u64,
}

impl DatasetOracle {
    pub fn new(data: LabeledDataset, seed: u64) -> Self {
        assert!(!data.is_empty(), "dataset oracle needs at least one example");
        Self { data, seed, next: 0 }
    }
}

impl ExampleOracle for DatasetOracle {
    fn dim(&self) -> usize {
        self.data.base().dim()
    }

    fn draw(&mut self) -> (Vec<i64>, i8) {
        let i = substream(self.seed, self.next).gen_range(0..self.data.len());
        self.next += 1;
        (self.data.base().point(i).to_vec(), self.data.labels()[i])
    }
}

/// Wrapper counting every draw made through it.
#[derive(Clone, Debug)]
pub struct CountingOracle<O> {
    inner: O,
    count: u64,
}

impl<O: ExampleOracle> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, count: 0 }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

impl<O: ExampleOracle> ExampleOracle for CountingOracle<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn draw(&mut self) -> (Vec<i64>, i8) {
        self.count += 1;
        self.inner.draw()
    }
}
