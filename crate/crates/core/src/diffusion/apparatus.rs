//! Exit probabilities, Green function and expected additive functionals of
//! the transformed process on a bounded interval.

use crate::diffusion::model::TransformedModel;
use crate::error::{Error, Result};
use crate::numerics::{integrate_with_breaks, QuadOptions};

const DEGENERATE_SCALE: f64 = 1e-14;

fn check_interval(model: &TransformedModel, a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a < b) {
        return Err(Error::InvalidArgument(format!("need a < b, got [{a}, {b}]")));
    }
    if !(a <= x && x <= b) {
        return Err(Error::InvalidArgument(format!("x = {x} outside [{a}, {b}]")));
    }
    let support = model.support();
    if !(support.contains(a) && support.contains(b)) {
        return Err(Error::InvalidArgument(format!(
            "[{a}, {b}] is not inside the model support {support}"
        )));
    }
    let den = model.scale(b) - model.scale(a);
    if !(den >= DEGENERATE_SCALE) {
        return Err(Error::DegenerateInterval { a, b });
    }
    Ok(den)
}

/// Probabilities that the process started at `x` leaves `(a, b)` through
/// `a` and through `b`.
pub fn hitting_probabilities(model: &TransformedModel, a: f64, x: f64, b: f64) -> Result<(f64, f64)> {
    let den = check_interval(model, a, b, x)?;
    let lx = model.scale(x);
    let p_lower = (model.scale(b) - lx) / den;
    let p_upper = (lx - model.scale(a)) / den;
    Ok((p_lower, p_upper))
}

/// Green function of the process killed on leaving `(a, b)`, with respect
/// to the speed measure.
pub fn green_function(model: &TransformedModel, a: f64, b: f64, x: f64, y: f64) -> Result<f64> {
    let den = check_interval(model, a, b, x)?;
    if !(a <= y && y <= b) {
        return Err(Error::InvalidArgument(format!("y = {y} outside [{a}, {b}]")));
    }
    let (la, lb) = (model.scale(a), model.scale(b));
    let (lx, ly) = (model.scale(x), model.scale(y));
    Ok(if y <= x {
        (lb - lx) * (ly - la) / den
    } else {
        (lb - ly) * (lx - la) / den
    })
}

/// `E_x ∫_0^ρ h(X_t) dt` where `ρ` is the exit time from `(a, b)`.
pub fn expected_additive_functional<F: Fn(f64) -> f64>(
    model: &TransformedModel,
    a: f64,
    b: f64,
    x: f64,
    h: F,
    opts: QuadOptions,
) -> Result<f64> {
    let den = check_interval(model, a, b, x)?;
    let (la, lb, lx) = (model.scale(a), model.scale(b), model.scale(x));
    let r = integrate_with_breaks(
        |y| {
            let ly = model.scale(y);
            let g = if y <= x {
                (lb - lx) * (ly - la) / den
            } else {
                (lb - ly) * (lx - la) / den
            };
            h(y) * g * model.speed_density(y)
        },
        &[a, x, b],
        opts,
    )?;
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::spec::Interval;

    fn natural() -> TransformedModel {
        TransformedModel::natural_scale(Interval::new(-3.0, 3.0).unwrap()).unwrap()
    }

    #[test]
    fn brownian_exit_probabilities() {
        let (p, q) = hitting_probabilities(&natural(), -1.0, 0.5, 2.0).unwrap();
        assert!((p - 0.5).abs() < 1e-15 && (q - 0.5).abs() < 1e-15);
    }

    #[test]
    fn brownian_exit_time() {
        let t = expected_additive_functional(&natural(), -1.0, 2.0, 0.0, |_| 1.0, QuadOptions::default())
            .unwrap();
        assert!((t - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_interval_rejected() {
        let m = natural();
        assert!(matches!(
            hitting_probabilities(&m, 0.0, 0.0, 1e-16),
            Err(Error::DegenerateInterval { .. })
        ));
    }
}
