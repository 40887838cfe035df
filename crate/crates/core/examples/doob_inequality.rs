//! E(S_τ - I_τ) <= √3 √(Eτ) for Brownian motion, checked by simulation for
//! the optimal rule of the range problem and two baselines. The optimal
//! rule with c = 1 attains the bound.
//!
//!     cargo run --release --example doob_inequality -- [n_paths]

use htd_core::diffusion::{Interval, TransformedModel};
use htd_core::sim::{doob_type_check, PathConfig, StoppingRule};
use htd_core::surface::{extremal_surfaces, CostFunction, Schedule, SolverOptions, TriangleGrid};

fn main() -> htd_core::Result<()> {
    let n_paths: usize = std::env::args()
        .nth(1)
        .map_or(Ok(20_000), |v| v.parse())
        .expect("n_paths must be an integer");
    // Wide enough that no simulated path leaves the solved grid.
    let model = TransformedModel::natural_scale(Interval::new(-8.0, 8.0)?)?;
    let cost = CostFunction::constant(1.0)?;
    let grid = TriangleGrid::uniform(model.truncation(), 257)?;
    let p = extremal_surfaces(&model, &cost, &grid, &Schedule::geometric(&model, 30)?, &SolverOptions::default())?;
    let rules = [
        StoppingRule::extremal(p),
        StoppingRule::range_threshold(0.5)?,
        StoppingRule::Immediate,
    ];
    let config = PathConfig {
        n_paths,
        ..Default::default()
    };
    println!("{:<24} {:>16} {:>10} {:>18}", "rule", "E(S - I)", "√(3Eτ)", "slack");
    for row in doob_type_check(&model, &rules, &config)? {
        println!(
            "{:<24} {:>7.4} ± {:.4} {:>10.4} {:>8.4} ± {:.4}{}",
            row.rule,
            row.e_range.mean,
            row.e_range.se,
            row.bound,
            row.slack.mean,
            row.slack.se,
            if row.violated { "  VIOLATED" } else { "" }
        );
    }
    Ok(())
}
