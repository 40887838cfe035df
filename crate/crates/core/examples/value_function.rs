//! Value function on each region, its two closed forms on C0, and the
//! free-boundary residuals.
//!
//!     cargo run --release --example value_function

use htd_core::diffusion::{preset, Interval, TransformedModel};
use htd_core::surface::{extremal_surfaces, CostFunction, Schedule, SolverOptions, TriangleGrid};
use htd_core::value::{freeboundary_residuals, ValueField, ValueOptions};

fn main() -> htd_core::Result<()> {
    let model = TransformedModel::natural_scale(Interval::new(-3.0, 3.0)?)?;
    let cost = CostFunction::constant(1.0)?;
    let grid = TriangleGrid::uniform(model.truncation(), 129)?;
    let p = extremal_surfaces(&model, &cost, &grid, &Schedule::geometric(&model, 30)?, &SolverOptions::default())?;
    let field = ValueField::new(&p, ValueOptions::default())?;

    println!("natural scale, c = 1");
    for (i, x, s) in [(0.0, 0.0, 0.0), (-0.2, 0.1, 0.3), (-1.5, -1.4, 0.5), (-1.5, 0.3, 0.5), (-1.5, 0.4, 0.5)] {
        let e = field.eval(i, x, s)?;
        println!("  V({i:>5}, {x:>5}, {s:>5}) = {:.8}  in {:<2}  gap {:.1e}", e.value, e.region, e.gap);
    }
    let samples: Vec<(f64, f64, f64)> = (0..6)
        .flat_map(|k| {
            let i = -1.5 + 0.2 * k as f64;
            [(i, i + 0.2, i + 1.5), (i, i + 1.3, i + 1.5), (i, i, i + 0.4)]
        })
        .collect();
    let r = freeboundary_residuals(&field, &samples, 1e-4)?;
    println!("  worst residuals: eq312 {:.1e}, eq313 {:.1e}, eq317 {:.1e}", r.eq312.max, r.eq313.max, r.eq317.max);

    let model = preset("bm-gaussian", 1e-3, 1.0)?;
    let cost = CostFunction::proportional_range(1.0)?;
    let grid = TriangleGrid::uniform(model.truncation(), 129)?;
    let p = extremal_surfaces(&model, &cost, &grid, &Schedule::geometric(&model, 30)?, &SolverOptions::default())?;
    let field = ValueField::new(&p, ValueOptions::default())?;
    let e = field.eval(0.0, 0.0, 0.0)?;
    println!("\nBrownian motion, normal target, c = 1");
    println!("  V(0, 0, 0) = {:.8} (forms differ by {:.1e})", e.value, e.gap);
    println!("  minimal detection loss 1 - V/2 = {:.6}", 1.0 - e.value / 2.0);
    Ok(())
}
