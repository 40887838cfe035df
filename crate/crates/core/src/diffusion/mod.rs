//! Diffusion specifications, the transformed process `X = 2F(Z) - 1`, and
//! the classical apparatus (exit probabilities, Green function).

pub mod apparatus;
pub mod model;
pub mod spec;
pub mod table;

pub use apparatus::{expected_additive_functional, green_function, hitting_probabilities};
pub use model::{TransformOptions, TransformedModel};
pub use spec::{DiffusionCheck, DiffusionSpec, HiddenLevelLaw, Interval, ScalarFn};
pub use table::CoefficientTable;

use crate::error::{Error, Result};

/// Named models.
///
/// * `bm-gaussian`: standard Brownian motion with a standard normal hidden
///   level, truncated to `[-1 + eps, 1 - eps]`.
/// * `natural-scale`: the process is already in natural scale, truncated to
///   `[-half_width, half_width]`.
pub fn preset(name: &str, epsilon: f64, half_width: f64) -> Result<TransformedModel> {
    match name {
        "bm-gaussian" => TransformedModel::transformed_named(
            &DiffusionSpec::brownian(),
            &HiddenLevelLaw::standard_normal(),
            Interval::new(-1.0 + epsilon, 1.0 - epsilon)?,
            TransformOptions::default(),
            "bm-gaussian",
        ),
        "natural-scale" => TransformedModel::natural_scale(Interval::new(-half_width, half_width)?),
        other => Err(Error::Config(format!("unknown model preset '{other}'"))),
    }
}
