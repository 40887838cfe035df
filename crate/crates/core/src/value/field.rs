//! Value function over the whole state space with `a1'`, `a2'` tabulated
//! along the boundary maps.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::interp::lagrange;
use crate::numerics::integrate_with_breaks;
use crate::surface::{lower_map, upper_map, Separable, SurfacePair};
use crate::value::c0::{a1_prime_at, a2_prime_at, form_lower_base, form_upper_base, C0_QUAD};
use crate::value::{check_point, classify, lower_integral, upper_integral, Region};

#[derive(Clone, Copy, Debug)]
pub struct ValueOptions {
    /// Points of the uniform `a1'`/`a2'` tables across the truncation.
    pub table_points: usize,
}

impl Default for ValueOptions {
    fn default() -> Self {
        Self { table_points: 129 }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ValueEval {
    pub region: Region,
    /// Mean of the two closed forms on `C⁰`.
    pub value: f64,
    /// `|first form - second form|` on `C⁰`, `0` elsewhere.
    pub gap: f64,
}

/// Cubic interpolation on the finite run of a table that may contain `NaN`
/// where the boundary map left the truncation.
#[derive(Clone, Debug)]
pub(crate) struct PartialTable {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PartialTable {
    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let k = self.x.partition_point(|&v| v <= t).clamp(1, n - 1) - 1;
        if !(self.y[k].is_finite() && self.y[k + 1].is_finite()) {
            return f64::NAN;
        }
        // Finite run around the bracketing pair, then a 4-point window in it.
        let mut r0 = k;
        while r0 > 0 && self.y[r0 - 1].is_finite() {
            r0 -= 1;
        }
        let mut r1 = k + 1;
        while r1 + 1 < n && self.y[r1 + 1].is_finite() {
            r1 += 1;
        }
        let lo = k.saturating_sub(1).max(r0);
        let hi = (lo + 3).min(r1);
        let lo = hi.saturating_sub(3).max(r0);
        lagrange(&self.x[lo..=hi], &self.y[lo..=hi], t)
    }

    /// Whether `[a, b]` is covered by finite entries.
    fn covers(&self, a: f64, b: f64) -> bool {
        let n = self.x.len();
        let ka = self.x.partition_point(|&v| v <= a).clamp(1, n - 1) - 1;
        let kb = self.x.partition_point(|&v| v < b).clamp(1, n - 1);
        self.y[ka..=kb].iter().all(|v| v.is_finite())
    }

    fn breaks(&self, a: f64, b: f64) -> Vec<f64> {
        let mut pts = vec![a];
        pts.extend(self.x.iter().copied().filter(|&v| v > a && v < b));
        pts.push(b);
        pts
    }
}

/// The value function assembled from the surfaces.
pub struct ValueField<'a> {
    pub surfaces: &'a SurfacePair,
    cost: Option<Separable>,
    a1: Option<PartialTable>,
    a2: Option<PartialTable>,
}

impl<'a> ValueField<'a> {
    /// Tabulates `a1'` and `a2'` when the cost is separable; otherwise only
    /// `C⁻`, `C⁺` and `D` can be evaluated.
    pub fn new(surfaces: &'a SurfacePair, opts: ValueOptions) -> Result<Self> {
        if opts.table_points < 4 {
            return Err(Error::InvalidArgument("value tables need at least 4 points".into()));
        }
        let cost = surfaces.cost.as_separable();
        let (a1, a2) = match &cost {
            Some(c) => {
                let (lo, hi) = (surfaces.grid.lo(), surfaces.grid.hi());
                let n = opts.table_points;
                let x: Vec<f64> = (0..n)
                    .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
                    .collect();
                let h = surfaces.grid.max_step();
                let a1: Vec<f64> = x
                    .par_iter()
                    .map(|&u| {
                        upper_map(surfaces, u, u)
                            .and_then(|sg| a1_prime_at(surfaces, c, u, sg, h))
                            .unwrap_or(f64::NAN)
                    })
                    .collect();
                let a2: Vec<f64> = x
                    .par_iter()
                    .map(|&v| {
                        lower_map(surfaces, v, v)
                            .and_then(|io| a2_prime_at(surfaces, c, io, v, h))
                            .unwrap_or(f64::NAN)
                    })
                    .collect();
                (
                    Some(PartialTable { x: x.clone(), y: a1 }),
                    Some(PartialTable { x, y: a2 }),
                )
            }
            None => (None, None),
        };
        Ok(Self {
            surfaces,
            cost,
            a1,
            a2,
        })
    }

    /// Tabulated `a1'` (nodes, values); `NaN` where `s(i)` is unresolved.
    pub fn a1_table(&self) -> Option<(&[f64], &[f64])> {
        self.a1.as_ref().map(|t| (&t.x[..], &t.y[..]))
    }

    pub fn a2_table(&self) -> Option<(&[f64], &[f64])> {
        self.a2.as_ref().map(|t| (&t.x[..], &t.y[..]))
    }

    pub fn region(&self, i: f64, x: f64, s: f64) -> Result<Region> {
        classify(self.surfaces, i, x, s)
    }

    pub fn value(&self, i: f64, x: f64, s: f64) -> Result<f64> {
        Ok(self.eval(i, x, s)?.value)
    }

    pub fn eval(&self, i: f64, x: f64, s: f64) -> Result<ValueEval> {
        check_point(i, x, s)?;
        let p = self.surfaces;
        let region = classify(p, i, x, s)?;
        let value = match region {
            Region::D => s - i,
            Region::CMinus => s - i + lower_integral(p, i, x, s, p.f_at(i, s))?,
            Region::CPlus => s - i + upper_integral(p, i, x, s, p.g_at(i, s))?,
            Region::C0 => {
                let (v1, v2) = self.c0_forms(i, x, s)?;
                return Ok(ValueEval {
                    region,
                    value: 0.5 * (v1 + v2),
                    gap: (v1 - v2).abs(),
                });
            }
        };
        Ok(ValueEval {
            region,
            value,
            gap: 0.0,
        })
    }

    /// Both `C⁰` forms from the tabulated `a1'`, `a2'`.
    pub fn c0_forms(&self, i: f64, x: f64, s: f64) -> Result<(f64, f64)> {
        let p = self.surfaces;
        let (c, a1, a2) = match (&self.cost, &self.a1, &self.a2) {
            (Some(c), Some(a1), Some(a2)) => (c, a1, a2),
            _ => {
                return Err(Error::UnsupportedCost(
                    "closed forms on C0 need a separable cost c2(s) - c1(i)".into(),
                ))
            }
        };
        let iota = lower_map(p, s, i)?;
        let sigma = upper_map(p, i, s)?;
        if !a1.covers(iota, i) {
            return Err(Error::NoRootInTruncation(format!(
                "s(u) leaves the truncation for some u in [{iota}, {i}]"
            )));
        }
        if !a2.covers(s, sigma) {
            return Err(Error::NoRootInTruncation(format!(
                "i(v) leaves the truncation for some v in [{s}, {sigma}]"
            )));
        }
        let m = &p.model;
        let lx = m.scale(x);
        let lower = integrate_with_breaks(
            |u| (lx - m.scale(u)) * a1.eval(u) + (c.dc1)(u) * m.h(u),
            &a1.breaks(iota, i),
            C0_QUAD,
        )?;
        let upper = integrate_with_breaks(
            |v| (m.scale(v) - lx) * a2.eval(v) + (c.dc2)(v) * m.h(v),
            &a2.breaks(s, sigma),
            C0_QUAD,
        )?;
        Ok((
            form_lower_base(p, c, i, x, s, iota) + lower.value,
            form_upper_base(p, c, i, x, s, sigma) + upper.value,
        ))
    }
}
