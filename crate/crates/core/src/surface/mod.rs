//! Extremal stopping surfaces `f*` and `g*`.

pub mod checks;
pub mod cost;
pub mod curve;
pub mod extremal;
pub mod grid;
pub mod io;
pub mod maps;
pub mod rhs;

pub use checks::{monotonicity_report, ode_residuals, MonotonicityReport, OdeResiduals};
pub use cost::{CostFunction, Separable};
pub use curve::CurveOptions;
pub use extremal::{
    extremal_surfaces, solve_f_from_diagonal, solve_g_from_diagonal, Curve, CurveProvenance,
    Schedule, SolverOptions, SurfacePair,
};
pub use grid::TriangleGrid;
pub use io::{load_surfaces, save_surfaces, write_surfaces};
pub use maps::{boundary_maps, lower_map, upper_map};
pub use rhs::{rhs_f, rhs_g};
