//! Shared fixtures for the benchmarks.

use std::f64::consts::PI;

use kp_core::model::model_by_name;
use kp_core::{DiscreteOperator, FieldSampler, ModelSpec, OperatorSpec, SpectralField};

/// Operator with `modes` sine modes on `(0, π)` and a catalog model.
pub fn fixture(modes: usize, model: &str) -> (DiscreteOperator, ModelSpec, SpectralField) {
    let op = DiscreteOperator::new(OperatorSpec::new(1, 0.0, modes, PI)).expect("valid operator");
    let model = model_by_name(model).expect("catalog model");
    let u0 = FieldSampler::new(7).uniform(modes, 1.0);
    (op, model, u0)
}
