//! Drives the batch commands from a TOML configuration, as the `htd`
//! binary does, writing into a scratch directory.
//!
//!     cargo run --release --example run_config

use htd_core::cli::{cmd_simulate, cmd_surfaces, cmd_value, RunConfig};

const CONFIG: &str = r#"
[model]
preset = "natural-scale"
half_width = 8.0

[cost]
kind = "constant"
c = 1.0

[grid]
nodes = 129

[value]
points = [[0.0, 0.0, 0.0], [-1.0, -0.9, 0.5]]
residual_samples = 5

[simulation]
rules = ["extremal", "range_threshold(1)"]

[simulation.path]
n_paths = 5000
seed = 42
"#;

fn main() -> htd_core::Result<()> {
    let mut cfg = RunConfig::from_toml_str(CONFIG)?;
    cfg.out_dir = std::env::temp_dir().join("htd_run_config");

    let s = cmd_surfaces(&cfg)?;
    println!("surfaces: {} nodes, {} monotonicity violations", s.nodes, s.monotonicity.total());
    let r = cmd_value(&cfg)?;
    println!("value residual failures: {:?}", r.failures(cfg.tolerances.residual));
    for rep in cmd_simulate(&cfg)? {
        println!("{}: payoff {:.4} ± {:.4}", rep.rule, rep.range_payoff.mean, rep.range_payoff.se);
    }
    println!("artifacts in {}", cfg.out_dir.display());
    Ok(())
}
