//! Value function of the range problem, region by region.

pub mod c0;
pub mod field;
pub mod io;
pub mod residuals;

use std::fmt;

use serde::Serialize;

use crate::diffusion::TransformedModel;
use crate::error::{Error, Result};
use crate::numerics::{integrate, QuadOptions};
use crate::surface::{CostFunction, SurfacePair};

pub use c0::{a1_prime, a2_prime, value_on_c0};
pub use field::{ValueEval, ValueField, ValueOptions};
pub use io::write_values;
pub use residuals::{freeboundary_residuals, FreeBoundaryReport, Residual};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Region {
    /// `f* > g*`: no stopping at any `x` for this `(i, s)`.
    C0,
    /// `x < f* <= g*`.
    CMinus,
    /// `f* <= g* < x`.
    CPlus,
    /// Stopping set `f* <= x <= g*`.
    D,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::C0 => "C0",
            Region::CMinus => "C-",
            Region::CPlus => "C+",
            Region::D => "D",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub(crate) fn check_point(i: f64, x: f64, s: f64) -> Result<()> {
    if !(i <= x && x <= s) {
        return Err(Error::InvalidArgument(format!(
            "state (i, x, s) = ({i}, {x}, {s}) violates i <= x <= s"
        )));
    }
    Ok(())
}

pub fn classify(p: &SurfacePair, i: f64, x: f64, s: f64) -> Result<Region> {
    check_point(i, x, s)?;
    let (f, g) = (p.f_at(i, s), p.g_at(i, s));
    if !(f.is_finite() && g.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "surfaces undefined at (i, s) = ({i}, {s})"
        )));
    }
    Ok(if f > g {
        Region::C0
    } else if x < f {
        Region::CMinus
    } else if x > g {
        Region::CPlus
    } else {
        Region::D
    })
}

/// `H(x) = ∫_0^x (L(x) - L(y)) m'(y) dy` by adaptive quadrature; the model
/// also serves a cached version as [`TransformedModel::h`].
pub fn particular_solution_h(model: &TransformedModel, x: f64, quad: QuadOptions) -> Result<f64> {
    let lx = model.scale(x);
    let r = integrate(|y| (lx - model.scale(y)) * model.speed_density(y), 0.0, x, quad)?;
    Ok(r.value)
}

// ∫_a^b c(i, y, s) w(y) m'(y) dy for x-dependent costs, with the kernel
// given by `kernel`.
fn cost_integral<K: Fn(f64) -> f64>(
    model: &TransformedModel,
    cost: &CostFunction,
    i: f64,
    s: f64,
    a: f64,
    b: f64,
    kernel: K,
    quad: QuadOptions,
) -> Result<f64> {
    let r = integrate(
        |y| cost.value(i, y, s) * kernel(y) * model.speed_density(y),
        a,
        b,
        quad,
    )?;
    Ok(r.value)
}

/// `s - i + ∫_x^{f*} c(i, y, s) (L(y) - L(x)) m'(y) dy` for `x < f* <= g*`.
pub fn value_on_cminus(p: &SurfacePair, i: f64, x: f64, s: f64) -> Result<f64> {
    check_point(i, x, s)?;
    let (f, g) = (p.f_at(i, s), p.g_at(i, s));
    if !(x <= f && f <= g) {
        return Err(mismatch("C-", p, i, x, s));
    }
    Ok(s - i + lower_integral(p, i, x, s, f)?)
}

/// `s - i + ∫_{g*}^x c(i, y, s) (L(x) - L(y)) m'(y) dy` for `f* <= g* < x`.
pub fn value_on_cplus(p: &SurfacePair, i: f64, x: f64, s: f64) -> Result<f64> {
    check_point(i, x, s)?;
    let (f, g) = (p.f_at(i, s), p.g_at(i, s));
    if !(f <= g && g <= x) {
        return Err(mismatch("C+", p, i, x, s));
    }
    Ok(s - i + upper_integral(p, i, x, s, g)?)
}

pub(crate) fn lower_integral(p: &SurfacePair, i: f64, x: f64, s: f64, f: f64) -> Result<f64> {
    let model = &p.model;
    if p.cost.is_x_independent() {
        return Ok(p.cost.value(i, x, s) * model.k_lower(x, f));
    }
    let lx = model.scale(x);
    cost_integral(model, &p.cost, i, s, x, f, |y| model.scale(y) - lx, p.options.quad)
}

pub(crate) fn upper_integral(p: &SurfacePair, i: f64, x: f64, s: f64, g: f64) -> Result<f64> {
    let model = &p.model;
    if p.cost.is_x_independent() {
        return Ok(p.cost.value(i, x, s) * model.k_upper(g, x));
    }
    let lx = model.scale(x);
    cost_integral(model, &p.cost, i, s, g, x, |y| lx - model.scale(y), p.options.quad)
}

pub(crate) fn mismatch(expected: &'static str, p: &SurfacePair, i: f64, x: f64, s: f64) -> Error {
    let found = classify(p, i, x, s).map(Region::as_str).unwrap_or("undefined");
    Error::RegionMismatch {
        expected,
        found,
        i,
        x,
        s,
    }
}
