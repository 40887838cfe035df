//! Right-hand sides of the surface equations, kept as numerator and
//! denominator so the stepper can switch to the inverse equation near the
//! diagonal where the denominator vanishes.

use crate::diffusion::TransformedModel;
use crate::error::{Error, Result};
use crate::numerics::{integrate, QuadOptions};
use crate::surface::cost::CostFunction;

/// Denominators smaller than this (relative) are treated as singular.
const SINGULAR: f64 = 1e-14;

/// Slope of `i ↦ f(i, s)` as `num / den`; `den` vanishes on `f = i`.
pub fn f_parts(
    model: &TransformedModel,
    cost: &CostFunction,
    i: f64,
    s: f64,
    f: f64,
    quad: QuadOptions,
) -> Result<(f64, f64)> {
    let li = model.scale(i);
    let bracket = if cost.is_x_independent() {
        1.0 - cost.dc_di(i, f, s) * model.k_lower(i, f)
    } else {
        let r = integrate(
            |y| cost.dc_di(i, y, s) * (model.scale(y) - li) * model.speed_density(y),
            i,
            f,
            quad,
        )?;
        1.0 - r.value
    };
    let num = model.generator_weight(f) * bracket;
    let den = cost.value(i, f, s) * (model.scale(f) - li);
    Ok((num, den))
}

/// Slope of `s ↦ g(i, s)` as `num / den`; `den` vanishes on `g = s`.
pub fn g_parts(
    model: &TransformedModel,
    cost: &CostFunction,
    i: f64,
    s: f64,
    g: f64,
    quad: QuadOptions,
) -> Result<(f64, f64)> {
    let ls = model.scale(s);
    let bracket = if cost.is_x_independent() {
        1.0 + cost.dc_ds(i, g, s) * model.k_upper(g, s)
    } else {
        let r = integrate(
            |y| cost.dc_ds(i, y, s) * (ls - model.scale(y)) * model.speed_density(y),
            g,
            s,
            quad,
        )?;
        1.0 + r.value
    };
    let num = model.generator_weight(g) * bracket;
    let den = cost.value(i, g, s) * (ls - model.scale(g));
    Ok((num, den))
}

/// `∂f/∂i` at `(i, s, f)`.
pub fn rhs_f(model: &TransformedModel, cost: &CostFunction, i: f64, s: f64, f: f64) -> Result<f64> {
    let (num, den) = f_parts(model, cost, i, s, f, QuadOptions::default())?;
    if den.abs() <= SINGULAR * (1.0 + model.scale(i).abs()) {
        return Err(Error::SingularDenominator { t: i, y: f });
    }
    Ok(num / den)
}

/// `∂g/∂s` at `(i, s, g)`.
pub fn rhs_g(model: &TransformedModel, cost: &CostFunction, i: f64, s: f64, g: f64) -> Result<f64> {
    let (num, den) = g_parts(model, cost, i, s, g, QuadOptions::default())?;
    if den.abs() <= SINGULAR * (1.0 + model.scale(s).abs()) {
        return Err(Error::SingularDenominator { t: s, y: g });
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::Interval;
    use std::sync::Arc;

    fn natural() -> TransformedModel {
        TransformedModel::natural_scale(Interval::new(-3.0, 3.0).unwrap()).unwrap()
    }

    #[test]
    fn constant_cost_closed_form() {
        let m = natural();
        let c = CostFunction::constant(1.0).unwrap();
        assert!((rhs_f(&m, &c, 0.0, 1.0, 0.25).unwrap() - 2.0).abs() < 1e-14);
        assert!((rhs_g(&m, &c, -1.0, 0.0, -0.25).unwrap() - 2.0).abs() < 1e-14);
        let c2 = CostFunction::constant(2.0).unwrap();
        assert!((rhs_f(&m, &c2, 0.1, 1.0, 0.35).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_is_singular() {
        let m = natural();
        let c = CostFunction::constant(1.0).unwrap();
        assert!(matches!(
            rhs_f(&m, &c, 0.3, 1.0, 0.3),
            Err(Error::SingularDenominator { .. })
        ));
    }

    #[test]
    fn quadrature_and_moment_brackets_agree() {
        let m = natural();
        let sep = CostFunction::proportional_range(1.0).unwrap();
        let gen = CostFunction::general(
            Arc::new(|i: f64, _, s: f64| s - i),
            Arc::new(|_, _, _| -1.0),
            Arc::new(|_, _, _| 1.0),
        );
        let a = f_parts(&m, &sep, -0.5, 0.5, 0.1, QuadOptions::default()).unwrap();
        let b = f_parts(&m, &gen, -0.5, 0.5, 0.1, QuadOptions::default()).unwrap();
        assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
        let a = g_parts(&m, &sep, -0.5, 0.5, 0.1, QuadOptions::default()).unwrap();
        let b = g_parts(&m, &gen, -0.5, 0.5, 0.1, QuadOptions::default()).unwrap();
        assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
    }
}
