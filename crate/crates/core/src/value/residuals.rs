//! Finite-difference diagnostics of the free-boundary conditions: the
//! generator equation, normal reflection at both diagonals, and
//! instantaneous stopping and smooth fit at both surfaces.

use serde::Serialize;

use crate::error::Result;
use crate::value::{classify, value_on_cminus, value_on_cplus, Region, ValueField};

pub const NAMES: [&str; 7] = ["eq312", "eq313", "eq314", "eq315", "eq316", "eq317", "eq318"];

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Residual {
    pub max: f64,
    pub count: usize,
    pub worst_at: Option<(f64, f64, f64)>,
}

impl Residual {
    fn record(&mut self, r: f64, at: (f64, f64, f64)) {
        self.count += 1;
        if r > self.max || self.worst_at.is_none() {
            self.max = self.max.max(r);
            self.worst_at = Some(at);
        }
    }
}

/// Worst residual per condition. `eq312` is relative to the running cost;
/// the others are absolute.
#[derive(Clone, Debug, Default, Serialize)]
pub struct FreeBoundaryReport {
    pub step: f64,
    pub eq312: Residual,
    pub eq313: Residual,
    pub eq314: Residual,
    pub eq315: Residual,
    pub eq316: Residual,
    pub eq317: Residual,
    pub eq318: Residual,
}

impl FreeBoundaryReport {
    pub fn get(&self, name: &str) -> Option<&Residual> {
        match name {
            "eq312" => Some(&self.eq312),
            "eq313" => Some(&self.eq313),
            "eq314" => Some(&self.eq314),
            "eq315" => Some(&self.eq315),
            "eq316" => Some(&self.eq316),
            "eq317" => Some(&self.eq317),
            "eq318" => Some(&self.eq318),
            _ => None,
        }
    }

    fn slot(&mut self, k: usize) -> &mut Residual {
        match k {
            0 => &mut self.eq312,
            1 => &mut self.eq313,
            2 => &mut self.eq314,
            3 => &mut self.eq315,
            4 => &mut self.eq316,
            5 => &mut self.eq317,
            _ => &mut self.eq318,
        }
    }

    /// Names of conditions whose worst residual exceeds `tol`.
    pub fn failures(&self, tol: f64) -> Vec<&'static str> {
        NAMES
            .iter()
            .copied()
            .filter(|n| self.get(n).is_some_and(|r| r.max > tol))
            .collect()
    }
}

/// Residuals at one sample, in the order of [`NAMES`]; `None` where a
/// condition does not apply or its stencil leaves the admissible range.
pub fn point_residuals(
    field: &ValueField<'_>,
    i: f64,
    x: f64,
    s: f64,
    h: f64,
) -> Result<[Option<f64>; 7]> {
    let p = field.surfaces;
    let m = &p.model;
    let (lo, hi) = (p.grid.lo(), p.grid.hi());
    let mut out = [None; 7];
    let region = classify(p, i, x, s)?;

    if matches!(region, Region::CMinus | Region::CPlus) && x - h >= i && x + h <= s {
        let same = |xx: f64| classify(p, i, xx, s).is_ok_and(|r| r == region);
        if same(x - h) && same(x + h) {
            let v = |xx: f64| field.value(i, xx, s);
            let (a, b, c) = (v(x - h)?, v(x)?, v(x + h)?);
            let vx = (c - a) / (2.0 * h);
            let vxx = (c - 2.0 * b + a) / (h * h);
            let sig = m.sigma(x);
            let gen = m.mu(x) * vx + 0.5 * sig * sig * vxx;
            let cost = p.cost.value(i, x, s);
            out[0] = Some((gen - cost).abs() / cost.abs().max(f64::MIN_POSITIVE));
        }
    }
    if i - 2.0 * h >= lo {
        let v = |ii: f64| field.value(ii, i, s);
        let d = (3.0 * v(i)? - 4.0 * v(i - h)? + v(i - 2.0 * h)?) / (2.0 * h);
        out[1] = Some(d.abs());
    }
    if s + 2.0 * h <= hi {
        let v = |ss: f64| field.value(i, s, ss);
        let d = (-3.0 * v(s)? + 4.0 * v(s + h)? - v(s + 2.0 * h)?) / (2.0 * h);
        out[2] = Some(d.abs());
    }
    let (f, g) = (p.f_at(i, s), p.g_at(i, s));
    if f <= g {
        if f >= i && f <= s {
            out[3] = Some((value_on_cminus(p, i, f, s)? - (s - i)).abs());
            if f - 2.0 * h >= i {
                let v = |xx: f64| value_on_cminus(p, i, xx, s);
                let d = (3.0 * v(f)? - 4.0 * v(f - h)? + v(f - 2.0 * h)?) / (2.0 * h);
                out[5] = Some(d.abs());
            }
        }
        if g >= i && g <= s {
            out[4] = Some((value_on_cplus(p, i, g, s)? - (s - i)).abs());
            if g + 2.0 * h <= s {
                let v = |xx: f64| value_on_cplus(p, i, xx, s);
                let d = (-3.0 * v(g)? + 4.0 * v(g + h)? - v(g + 2.0 * h)?) / (2.0 * h);
                out[6] = Some(d.abs());
            }
        }
    }
    Ok(out)
}

/// Worst residuals over `samples` with finite-difference step `h`.
pub fn freeboundary_residuals(
    field: &ValueField<'_>,
    samples: &[(f64, f64, f64)],
    h: f64,
) -> Result<FreeBoundaryReport> {
    let mut report = FreeBoundaryReport {
        step: h,
        ..Default::default()
    };
    for &(i, x, s) in samples {
        let r = point_residuals(field, i, x, s, h)?;
        for (k, v) in r.iter().enumerate() {
            if let Some(v) = v {
                report.slot(k).record(*v, (i, x, s));
            }
        }
    }
    Ok(report)
}
