//! Monte Carlo of quickest detection: Brownian motion passes a hidden level
//! drawn from a standard normal. Compares the optimal rule with simple
//! baselines and checks the direct loss against its transformed form.
//!
//!     cargo run --release --example detection_simulation -- [n_paths]

use htd_core::diffusion::{preset, DiffusionSpec, HiddenLevelLaw};
use htd_core::sim::{simulate_detection, PathConfig, StoppingRule};
use htd_core::surface::{extremal_surfaces, CostFunction, Schedule, SolverOptions, TriangleGrid};
use htd_core::value::{ValueField, ValueOptions};

fn main() -> htd_core::Result<()> {
    let n_paths: usize = std::env::args()
        .nth(1)
        .map_or(Ok(20_000), |v| v.parse())
        .expect("n_paths must be an integer");
    let c = 1.0;
    let model = preset("bm-gaussian", 1e-3, 1.0)?;
    let cost = CostFunction::proportional_range(c)?;
    let grid = TriangleGrid::uniform(model.truncation(), 129)?;
    let p = extremal_surfaces(&model, &cost, &grid, &Schedule::geometric(&model, 30)?, &SolverOptions::default())?;
    let v = ValueField::new(&p, ValueOptions::default())?.value(0.0, 0.0, 0.0)?;
    println!("value module: minimal loss 1 - V(0,0,0)/2 = {:.5}\n", 1.0 - v / 2.0);

    let config = PathConfig {
        n_paths,
        seed: 7,
        ..Default::default()
    };
    let spec = DiffusionSpec::brownian();
    let law = HiddenLevelLaw::standard_normal();
    let rules = [
        StoppingRule::extremal(p),
        StoppingRule::range_threshold(0.4)?,
        StoppingRule::range_threshold(0.8)?,
        StoppingRule::Immediate,
    ];
    println!("{:<24} {:>17} {:>9} {:>9} {:>17}", "rule", "loss", "P(early)", "E late", "direct - transf.");
    for rule in &rules {
        let r = simulate_detection(&spec, &law, c, rule, &config)?;
        let (loss, early, late, gap) = (
            r.combined.unwrap(),
            r.p_early.unwrap(),
            r.e_late.unwrap(),
            r.identity_gap.unwrap(),
        );
        println!(
            "{:<24} {:>8.5} ± {:.5} {:>9.4} {:>9.4} {:>8.1e} ± {:.0e}",
            r.rule, loss.mean, loss.se, early.mean, late.mean, gap.mean, gap.se
        );
    }
    Ok(())
}
