//! Closed forms on `C⁰` for separable costs `c(i, s) = c2(s) - c1(i)`.
//!
//! On `C⁰` the value is `A(i, s) L(x) + B(i, s) + (c2(s) - c1(i)) H(x)` with
//! `A = a1(i) + a2(s)`. The derivatives `a1'`, `a2'` follow from matching
//! the known values on the boundaries with `C⁻` (at `i(s)`) and `C⁺` (at
//! `s(i)`); integrating `a1'` from `i(s)` or `a2'` up to `s(i)` gives two
//! independent expressions for the same value.

use crate::error::{Error, Result};
use crate::numerics::{integrate, QuadOptions};
use crate::surface::rhs::{rhs_f, rhs_g};
use crate::surface::{lower_map, upper_map, Separable, SurfacePair};
use crate::value::{check_point, mismatch};

pub(crate) fn separable(p: &SurfacePair) -> Result<Separable> {
    p.cost.as_separable().ok_or_else(|| {
        Error::UnsupportedCost("closed forms on C0 need a separable cost c2(s) - c1(i)".into())
    })
}

// Centred difference with step `h`, falling back to a one-sided second
// order stencil when one side leaves `[lo, hi]`.
fn partial<F: Fn(f64) -> f64>(fun: F, t: f64, h: f64, lo: f64, hi: f64) -> f64 {
    if t - h >= lo && t + h <= hi {
        (fun(t + h) - fun(t - h)) / (2.0 * h)
    } else if t + 2.0 * h <= hi {
        (-3.0 * fun(t) + 4.0 * fun(t + h) - fun(t + 2.0 * h)) / (2.0 * h)
    } else {
        (3.0 * fun(t) - 4.0 * fun(t - h) + fun(t - 2.0 * h)) / (2.0 * h)
    }
}

/// `a2'(s)` given `iota = i(s)`.
pub(crate) fn a2_prime_at(p: &SurfacePair, c: &Separable, iota: f64, s: f64, h: f64) -> Result<f64> {
    let m = &p.model;
    let f = p.f_at(iota, s);
    let f_i = rhs_f(m, &p.cost, iota, s, f)?;
    let f_s = partial(|v| p.f_at(iota, v), s, h, iota, p.grid.hi());
    let (l_iota, l_s) = (m.scale(iota), m.scale(s));
    let k = m.k_lower(iota, f);
    let first = f_s / f_i * (1.0 + (c.dc1)(iota) * k);
    let second = 1.0 + (c.dc2)(s) * (m.h(s) + m.speed_moment(f) - l_iota * m.speed_mass(f));
    Ok(-(first + second) / (l_s - l_iota))
}

/// `a1'(i)` given `sigma = s(i)`.
pub(crate) fn a1_prime_at(p: &SurfacePair, c: &Separable, i: f64, sigma: f64, h: f64) -> Result<f64> {
    let m = &p.model;
    let g = p.g_at(i, sigma);
    let g_s = rhs_g(m, &p.cost, i, sigma, g)?;
    let g_i = partial(|u| p.g_at(u, sigma), i, h, p.grid.lo(), sigma);
    let (l_i, l_sigma) = (m.scale(i), m.scale(sigma));
    let k = m.k_upper(g, sigma);
    let first = g_i / g_s * (1.0 + (c.dc2)(sigma) * k);
    let second =
        1.0 + (c.dc1)(i) * (m.h(i) - (l_sigma * m.speed_mass(g) - m.speed_moment(g)));
    Ok(-(first + second) / (l_sigma - l_i))
}

/// `a2'(s)`; the lower boundary map is resolved from the diagonal `i = s`.
pub fn a2_prime(p: &SurfacePair, s: f64) -> Result<f64> {
    let c = separable(p)?;
    let iota = lower_map(p, s, s)?;
    a2_prime_at(p, &c, iota, s, p.grid.max_step())
}

/// `a1'(i)`; the upper boundary map is resolved from the diagonal `s = i`.
pub fn a1_prime(p: &SurfacePair, i: f64) -> Result<f64> {
    let c = separable(p)?;
    let sigma = upper_map(p, i, i)?;
    a1_prime_at(p, &c, i, sigma, p.grid.max_step())
}

/// Terms of the first form outside the `a1'` integral.
pub(crate) fn form_lower_base(p: &SurfacePair, c: &Separable, i: f64, x: f64, s: f64, iota: f64) -> f64 {
    let m = &p.model;
    let f = p.f_at(iota, s);
    let lx = m.scale(x);
    s - iota
        + ((c.c2)(s) - (c.c1)(iota)) * (m.speed_moment(f) - lx * m.speed_mass(f))
        + ((c.c2)(s) - (c.c1)(i)) * m.h(x)
}

/// Terms of the second form outside the `a2'` integral.
pub(crate) fn form_upper_base(p: &SurfacePair, c: &Separable, i: f64, x: f64, s: f64, sigma: f64) -> f64 {
    let m = &p.model;
    let g = p.g_at(i, sigma);
    let lx = m.scale(x);
    sigma - i
        + ((c.c2)(sigma) - (c.c1)(i)) * (m.speed_moment(g) - lx * m.speed_mass(g))
        + ((c.c2)(s) - (c.c1)(i)) * m.h(x)
}

pub(crate) const C0_QUAD: QuadOptions = QuadOptions {
    abs_tol: 1e-9,
    rel_tol: 1e-10,
    max_subdivisions: 200,
};

/// Both closed forms at a `C⁰` point: the first integrates `a1'` over
/// `[i(s), i]`, the second `a2'` over `[s, s(i)]`. Boundary maps are
/// resolved afresh at every quadrature node; see
/// [`ValueField`](crate::value::ValueField) for a tabulated version.
pub fn value_on_c0(p: &SurfacePair, i: f64, x: f64, s: f64) -> Result<(f64, f64)> {
    check_point(i, x, s)?;
    let c = separable(p)?;
    if !(p.f_at(i, s) > p.g_at(i, s)) {
        return Err(mismatch("C0", p, i, x, s));
    }
    let m = &p.model;
    let h = p.grid.max_step();
    let iota = lower_map(p, s, i)?;
    let sigma = upper_map(p, i, s)?;
    let lx = m.scale(x);

    let mut failure = None;
    let lower = integrate(
        |u| match upper_map(p, u, u).and_then(|sg| a1_prime_at(p, &c, u, sg, h)) {
            Ok(a) => (lx - m.scale(u)) * a + (c.dc1)(u) * m.h(u),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        iota,
        i,
        C0_QUAD,
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let upper = integrate(
        |v| match lower_map(p, v, v).and_then(|io| a2_prime_at(p, &c, io, v, h)) {
            Ok(a) => (m.scale(v) - lx) * a + (c.dc2)(v) * m.h(v),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        s,
        sigma,
        C0_QUAD,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let v1 = form_lower_base(p, &c, i, x, s, iota) + lower?.value;
    let v2 = form_upper_base(p, &c, i, x, s, sigma) + upper?.value;
    Ok((v1, v2))
}
