//! Coefficients of X = 2F(Z) - 1 for Brownian motion with a standard
//! normal hidden level, and the exit-problem quantities built from them.
//!
//!     cargo run --release --example diffusion_apparatus

use htd_core::diffusion::{
    expected_additive_functional, green_function, hitting_probabilities, preset, Interval, TransformedModel,
};
use htd_core::numerics::QuadOptions;

fn main() -> htd_core::Result<()> {
    let model = preset("bm-gaussian", 1e-3, 1.0)?;
    println!("{:>6} {:>10} {:>10} {:>12} {:>12}", "x", "mu", "sigma", "L(x)", "m'(x)");
    for x in [-0.9, -0.5, 0.0, 0.5, 0.9] {
        println!(
            "{x:>6.2} {:>10.5} {:>10.5} {:>12.6} {:>12.6}",
            model.mu(x),
            model.sigma(x),
            model.scale(x),
            model.speed_density(x)
        );
    }

    let (a, b) = (-0.6, 0.4);
    let (down, up) = hitting_probabilities(&model, a, 0.0, b)?;
    println!("\nfrom 0, leave ({a}, {b}) at a with {down:.6}, at b with {up:.6}");
    let g = green_function(&model, a, b, 0.0, 0.2)?;
    let g_swapped = green_function(&model, a, b, 0.2, 0.0)?;
    println!("G(0, 0.2) = {g:.8}, G(0.2, 0) = {g_swapped:.8}");
    let exit = expected_additive_functional(&model, a, b, 0.0, |_| 1.0, QuadOptions::default())?;
    println!("E_0 exit time of ({a}, {b}) = {exit:.6}");

    // Standard Brownian motion leaves (-1, 1) from 0 after one time unit on average.
    let natural = TransformedModel::natural_scale(Interval::new(-3.0, 3.0)?)?;
    let e = expected_additive_functional(&natural, -1.0, 1.0, 0.0, |_| 1.0, QuadOptions::default())?;
    println!("natural scale: E_0 exit time of (-1, 1) = {e:.10}");
    Ok(())
}
