//! Boundary maps `s ↦ i(s)` and `i ↦ s(i)` where `f*` meets `g*`.

use crate::error::{Error, Result};
use crate::surface::extremal::SurfacePair;

const ROOT_TOL: f64 = 1e-13;

/// Both maps at a `C⁰` cell: `(i(s), s(i))`.
pub fn boundary_maps(p: &SurfacePair, i: f64, s: f64) -> Result<(f64, f64)> {
    Ok((lower_map(p, s, i)?, upper_map(p, i, s)?))
}

/// `i(s)`: the root of `u ↦ f*(u, s) - g*(u, s)` at or below `i_upper`.
pub fn lower_map(p: &SurfacePair, s: f64, i_upper: f64) -> Result<f64> {
    let gap = |u: f64| p.f_at(u, s) - p.g_at(u, s);
    let d0 = gap(i_upper);
    if d0 <= 0.0 {
        if d0 > -1e-10 {
            return Ok(i_upper);
        }
        return Err(Error::RegionMismatch {
            expected: "C0",
            found: "C-/C+",
            i: i_upper,
            x: f64::NAN,
            s,
        });
    }
    let lo_edge = p.grid.lo();
    let h = p.grid.max_step();
    // Walk down in grid steps until the gap changes sign.
    let mut a = i_upper;
    let b = loop {
        if a <= lo_edge {
            return Err(Error::NoRootInTruncation(format!(
                "f* - g* stays positive on [{lo_edge}, {i_upper}] at s = {s}"
            )));
        }
        let b = a;
        a = (a - h).max(lo_edge);
        if gap(a) <= 0.0 {
            break b;
        }
    };
    let root = bisect(&gap, a, b);
    Ok(refine(p, root, h, |u| Ok(p.f_exact(u, s)? - p.g_exact(u, s)?)))
}

/// `s(i)`: the root of `v ↦ f*(i, v) - g*(i, v)` at or above `s_lower`.
pub fn upper_map(p: &SurfacePair, i: f64, s_lower: f64) -> Result<f64> {
    let gap = |v: f64| p.f_at(i, v) - p.g_at(i, v);
    let d0 = gap(s_lower);
    if d0 <= 0.0 {
        if d0 > -1e-10 {
            return Ok(s_lower);
        }
        return Err(Error::RegionMismatch {
            expected: "C0",
            found: "C-/C+",
            i,
            x: f64::NAN,
            s: s_lower,
        });
    }
    let hi_edge = p.grid.hi();
    let h = p.grid.max_step();
    let mut b = s_lower;
    let a = loop {
        if b >= hi_edge {
            return Err(Error::NoRootInTruncation(format!(
                "f* - g* stays positive on [{s_lower}, {hi_edge}] at i = {i}"
            )));
        }
        let a = b;
        b = (b + h).min(hi_edge);
        if gap(b) <= 0.0 {
            break a;
        }
    };
    // gap is positive at a and non-positive at b; bisect on -gap.
    let neg = |v: f64| -gap(v);
    let root = bisect(&neg, a, b);
    Ok(refine(p, root, h, |v| Ok(p.g_exact(i, v)? - p.f_exact(i, v)?)))
}

// Root of an increasing-through-zero function with `fun(a) <= 0 < fun(b)`.
fn bisect<F: Fn(f64) -> f64>(fun: &F, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if fun(m) <= 0.0 {
            a = m;
        } else {
            b = m;
        }
        if b - a <= ROOT_TOL * (1.0 + a.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}

// Secant polish on the re-integrated gap; keeps the interpolated root if
// the polish misbehaves or moves further than a grid step.
fn refine<F: Fn(f64) -> Result<f64>>(p: &SurfacePair, root: f64, h: f64, exact: F) -> f64 {
    if p.exact_start.is_none() {
        return root;
    }
    let mut x0 = root;
    let mut x1 = root + 1e-3 * h;
    let (mut f0, mut f1) = match (exact(x0), exact(x1)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return root,
    };
    for _ in 0..8 {
        if f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        if !x2.is_finite() || (x2 - root).abs() > h {
            return root;
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = match exact(x1) {
            Ok(v) => v,
            Err(_) => return root,
        };
        if (x1 - x0).abs() <= ROOT_TOL * (1.0 + x1.abs()) {
            break;
        }
    }
    x1
}
