//! Surfaces of the detection problem for Brownian motion and a standard
//! normal target: cost c (s - i) on X = 2F(Z) - 1.
//!
//!     cargo run --release --example gaussian_surfaces -- [nodes]

use std::time::Instant;

use htd_core::diffusion::preset;
use htd_core::surface::{boundary_maps, extremal_surfaces, CostFunction, Schedule, SolverOptions, TriangleGrid};

fn main() -> htd_core::Result<()> {
    let nodes: usize = std::env::args()
        .nth(1)
        .map_or(Ok(129), |v| v.parse())
        .expect("nodes must be an integer");
    let model = preset("bm-gaussian", 1e-3, 1.0)?;
    let cost = CostFunction::proportional_range(1.0)?;
    let grid = TriangleGrid::uniform(model.truncation(), nodes)?;
    let schedule = Schedule::geometric(&model, 30)?;

    let t = Instant::now();
    let p = extremal_surfaces(&model, &cost, &grid, &schedule, &SolverOptions::default())?;
    println!("solved {nodes} nodes in {:.2?}", t.elapsed());

    println!("{:>7} {:>7} {:>10} {:>10} {:>5}", "i", "s", "f*", "g*", "C0");
    for (i, s) in [(-0.8, 0.8), (-0.5, 0.5), (-0.3, 0.1), (0.0, 0.0), (-0.2, 0.6)] {
        println!(
            "{i:>7.2} {s:>7.2} {:>10.6} {:>10.6} {:>5}",
            p.f_at(i, s),
            p.g_at(i, s),
            p.in_c0(i, s)
        );
    }
    let clipped = p.g_provenance.iter().filter(|c| c.clipped_from.is_some()).count();
    println!("g* slices clipped at the upper edge: {clipped} of {}", p.n());

    // Where a path started in C0 at (0, 0, 0) leaves it.
    let (lower, upper) = boundary_maps(&p, 0.0, 0.0)?;
    println!("from (0, 0): leaves C0 through i = {lower:.6} or s = {upper:.6}");
    println!("monotonicity: {}", p.monotonicity().first_violation().unwrap_or("ok".into()));
    Ok(())
}
