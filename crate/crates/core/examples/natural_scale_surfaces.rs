//! Extremal surfaces for a process already in natural scale with constant
//! cost c, where f*(i, s) = i + 1/(2c) and g*(i, s) = s - 1/(2c).
//!
//!     cargo run --release --example natural_scale_surfaces -- [c] [nodes]

use htd_core::diffusion::{Interval, TransformedModel};
use htd_core::surface::{
    extremal_surfaces, ode_residuals, save_surfaces, CostFunction, Schedule, SolverOptions, TriangleGrid,
};

fn main() -> htd_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let c: f64 = args.next().map_or(Ok(1.0), |v| v.parse()).expect("c must be a number");
    let nodes: usize = args.next().map_or(Ok(257), |v| v.parse()).expect("nodes must be an integer");

    let model = TransformedModel::natural_scale(Interval::new(-3.0, 3.0)?)?;
    let cost = CostFunction::constant(c)?;
    let grid = TriangleGrid::uniform(model.truncation(), nodes)?;
    let schedule = Schedule::geometric(&model, 30)?;
    let p = extremal_surfaces(&model, &cost, &grid, &schedule, &SolverOptions::default())?;

    for (i, s) in [(-2.0, 1.0), (-1.0, 0.5), (0.0, 2.0), (0.5, 0.5)] {
        println!(
            "f*({i:>4}, {s:>4}) = {:.10}  (i + 1/2c = {:.10})   g* = {:.10}  (s - 1/2c = {:.10})",
            p.f_at(i, s),
            i + 0.5 / c,
            p.g_at(i, s),
            s - 0.5 / c
        );
    }
    let used: Vec<usize> = p.f_provenance.iter().map(|c| c.starts_used).collect();
    println!("diagonal starts used per slice: min {}, max {}", used.iter().min().unwrap(), used.iter().max().unwrap());
    println!("monotonicity: {}", p.monotonicity().first_violation().unwrap_or("ok".into()));
    println!("{:?}", ode_residuals(&p));

    let path = std::env::temp_dir().join("natural_scale_surfaces.csv");
    save_surfaces(&p, &[format!("natural scale, c = {c}, {nodes} nodes")], &path)?;
    println!("wrote {}", path.display());
    Ok(())
}
