//! Benchmark fixtures shared by the criterion benches.

use lkfit::sim::{sample_increments, truth_model, ModelKind};
use lkfit::{CharExponentModel, MeasureShape, ModelSpec, SampleSet};

/// `n` increments of the Gaussian plus exponential jumps example.
pub fn example_sample(n: usize) -> SampleSet {
    let spec = ModelSpec::new(ModelKind::brownian_gamma(), 1).expect("valid model");
    sample_increments(&spec, n).expect("n > 0")
}

/// The example's true model discretized with `bins` bins on `[-25, 25]`.
pub fn example_truth(bins: usize) -> CharExponentModel {
    let spec = ModelSpec::new(ModelKind::brownian_gamma(), 1).expect("valid model");
    let shape = MeasureShape::new(-25.0, 25.0, bins).expect("valid shape");
    truth_model(&spec, shape).expect("truth discretizes").model
}
