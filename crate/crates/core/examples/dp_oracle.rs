//! Lattice dynamic program for the range problem compared with the closed
//! form V(0, 0, 0) = 3/(4c) of the natural-scale model.
//!
//!     cargo run --release --example dp_oracle -- [steps]

use htd_core::diffusion::Interval;
use htd_core::oracle::TrinomialDp;
use htd_core::surface::CostFunction;

fn main() -> htd_core::Result<()> {
    let steps: usize = std::env::args()
        .nth(1)
        .map_or(Ok(100), |v| v.parse())
        .expect("steps must be an integer");
    let cost = CostFunction::constant(1.0)?;
    println!("{:>6} {:>8} {:>10}", "steps", "h", "V(0,0,0)");
    let mut n = steps;
    for _ in 0..3 {
        let dp = TrinomialDp::new(Interval::new(-2.0, 2.0)?, n)?;
        let v = dp.solve(&cost)?.value(0.0, 0.0, 0.0)?;
        println!("{n:>6} {:>8.4} {v:>10.6}", dp.h());
        n *= 2;
    }
    let ex = TrinomialDp::new(Interval::new(-2.0, 2.0)?, steps)?.extrapolated_value(&cost, 0.0, 0.0, 0.0)?;
    println!("Richardson from {steps}/{}: {:.6}, closed form 0.75", 2 * steps, ex.extrapolated);

    let dp = TrinomialDp::new(Interval::new(-2.0, 2.0)?, steps)?;
    let sol = dp.solve(&cost)?;
    // A slice (i, s) of width about 1 centred on the origin.
    let (mid, half) = (steps / 2, (0.5 / dp.h()).round() as usize);
    let (i, s) = (dp.node(mid - half), dp.node(mid + half));
    print!("stop at (i, x, s) = ({i:.2}, x, {s:.2}) for x in");
    for k in mid - half..=mid + half {
        let x = dp.node(k);
        if sol.stops(i, x, s)? {
            print!(" {x:.2}");
        }
    }
    println!();
    Ok(())
}
