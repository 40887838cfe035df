//! Batch front end shared by the `htd` binary and the examples.

pub mod commands;
pub mod config;
pub mod validate;

pub use commands::{cmd_simulate, cmd_surfaces, cmd_validate, cmd_value, SurfaceSummary};
pub use config::{CostConfig, RunConfig, SimulationMode};
pub use validate::{Check, ValidationReport};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Exit code for an error: 2 for configuration and input problems, 3 for
/// numerical-quality failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::InvalidArgument(_)
        | Error::InvalidLaw(_)
        | Error::InvalidCost(_)
        | Error::UnsupportedCost(_)
        | Error::NonPositiveDiffusion { .. }
        | Error::Io(_)
        | Error::Csv(_)
        | Error::Json(_) => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}
