//! Running cost `c(i, x, s)` of the range problem.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::diffusion::spec::ScalarFn;
use crate::error::{Error, Result};
use crate::numerics::interp::{bracket, HermiteTable};

pub type ScalarFn3 = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// `c(i, x, s) = c2(s) - c1(i)` with derivatives.
#[derive(Clone)]
pub struct Separable {
    pub c1: ScalarFn,
    pub dc1: ScalarFn,
    pub c2: ScalarFn,
    pub dc2: ScalarFn,
}

#[derive(Clone)]
pub enum CostFunction {
    /// `c ≡ c0`.
    Constant(f64),
    Separable(Separable),
    General {
        c: ScalarFn3,
        dc_di: ScalarFn3,
        dc_ds: ScalarFn3,
    },
}

impl fmt::Debug for CostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostFunction::Constant(c) => write!(f, "Constant({c})"),
            CostFunction::Separable(_) => write!(f, "Separable"),
            CostFunction::General { .. } => write!(f, "General"),
        }
    }
}

impl CostFunction {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidCost(format!("constant cost must be positive, got {c}")));
        }
        Ok(CostFunction::Constant(c))
    }

    /// `c (s - i)`: the cost of the detection problem after the transform.
    pub fn proportional_range(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidCost(format!("cost scale must be positive, got {c}")));
        }
        Ok(CostFunction::Separable(Separable {
            c1: Arc::new(move |i| c * i),
            dc1: Arc::new(move |_| c),
            c2: Arc::new(move |s| c * s),
            dc2: Arc::new(move |_| c),
        }))
    }

    pub fn separable(c1: ScalarFn, dc1: ScalarFn, c2: ScalarFn, dc2: ScalarFn) -> Self {
        CostFunction::Separable(Separable { c1, dc1, c2, dc2 })
    }

    pub fn general(c: ScalarFn3, dc_di: ScalarFn3, dc_ds: ScalarFn3) -> Self {
        CostFunction::General { c, dc_di, dc_ds }
    }

    /// Separable cost from two CSV tables with columns `(u, c, dc)`.
    pub fn separable_from_csv<P: AsRef<Path>>(c1_path: P, c2_path: P) -> Result<Self> {
        let t1 = read_table(c1_path.as_ref(), 3)?;
        let t2 = read_table(c2_path.as_ref(), 3)?;
        let mk = |rows: &[Vec<f64>]| {
            let x: Vec<f64> = rows.iter().map(|r| r[0]).collect();
            let y: Vec<f64> = rows.iter().map(|r| r[1]).collect();
            let d: Vec<f64> = rows.iter().map(|r| r[2]).collect();
            let dd = HermiteTable::from_values(x.clone(), d.clone(), false);
            (Arc::new(HermiteTable::new(x, y, d)), Arc::new(dd))
        };
        let (v1, d1) = mk(&t1);
        let (v2, d2) = mk(&t2);
        Ok(CostFunction::Separable(Separable {
            c1: Arc::new(move |i| v1.eval(i)),
            dc1: Arc::new(move |i| d1.eval(i)),
            c2: Arc::new(move |s| v2.eval(s)),
            dc2: Arc::new(move |s| d2.eval(s)),
        }))
    }

    /// General cost from a CSV with columns `(i, x, s, c, dc_di, dc_ds)` on
    /// a full tensor grid, interpolated trilinearly.
    pub fn general_from_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let rows = read_table(path.as_ref(), 6)?;
        let grid = Arc::new(TensorTable::new(&rows)?);
        let (g1, g2, g3) = (grid.clone(), grid.clone(), grid);
        Ok(CostFunction::General {
            c: Arc::new(move |i, x, s| g1.eval(0, i, x, s)),
            dc_di: Arc::new(move |i, x, s| g2.eval(1, i, x, s)),
            dc_ds: Arc::new(move |i, x, s| g3.eval(2, i, x, s)),
        })
    }

    pub fn value(&self, i: f64, x: f64, s: f64) -> f64 {
        match self {
            CostFunction::Constant(c) => *c,
            CostFunction::Separable(p) => (p.c2)(s) - (p.c1)(i),
            CostFunction::General { c, .. } => c(i, x, s),
        }
    }

    pub fn dc_di(&self, i: f64, x: f64, s: f64) -> f64 {
        match self {
            CostFunction::Constant(_) => 0.0,
            CostFunction::Separable(p) => -(p.dc1)(i),
            CostFunction::General { dc_di, .. } => dc_di(i, x, s),
        }
    }

    pub fn dc_ds(&self, i: f64, x: f64, s: f64) -> f64 {
        match self {
            CostFunction::Constant(_) => 0.0,
            CostFunction::Separable(p) => (p.dc2)(s),
            CostFunction::General { dc_ds, .. } => dc_ds(i, x, s),
        }
    }

    /// Whether `c` (and so its partials) does not depend on `x`.
    pub fn is_x_independent(&self) -> bool {
        !matches!(self, CostFunction::General { .. })
    }

    /// Separable decomposition, if the cost has one. A constant `c0` is
    /// reported as `c2 ≡ c0`, `c1 ≡ 0`.
    pub fn as_separable(&self) -> Option<Separable> {
        match self {
            CostFunction::Constant(c) => {
                let c = *c;
                Some(Separable {
                    c1: Arc::new(|_| 0.0),
                    dc1: Arc::new(|_| 0.0),
                    c2: Arc::new(move |_| c),
                    dc2: Arc::new(|_| 0.0),
                })
            }
            CostFunction::Separable(p) => Some(p.clone()),
            CostFunction::General { .. } => None,
        }
    }

    /// Checks positivity, monotonicity and derivative consistency on the
    /// sampled triples `i <= x <= s` with `i < s`.
    pub fn check(&self, samples: &[(f64, f64, f64)]) -> Result<()> {
        for &(i, x, s) in samples {
            if !(i <= x && x <= s && i < s) {
                continue;
            }
            let c = self.value(i, x, s);
            if !(c > 0.0) {
                return Err(Error::InvalidCost(format!("c({i}, {x}, {s}) = {c} is not positive")));
            }
            let di = self.dc_di(i, x, s);
            let ds = self.dc_ds(i, x, s);
            if di > 0.0 || ds < 0.0 {
                return Err(Error::InvalidCost(format!(
                    "c must decrease in i and increase in s; at ({i}, {x}, {s}) dc/di = {di}, dc/ds = {ds}"
                )));
            }
            let h = 1e-5 * (1.0 + i.abs().max(s.abs()));
            let fd_i = (self.value(i + h, x, s) - self.value(i - h, x, s)) / (2.0 * h);
            let fd_s = (self.value(i, x, s + h) - self.value(i, x, s - h)) / (2.0 * h);
            let scale = |a: f64, b: f64| 1e-6 * a.abs().max(b.abs()).max(1.0);
            if (fd_i - di).abs() > scale(fd_i, di) || (fd_s - ds).abs() > scale(fd_s, ds) {
                return Err(Error::InvalidCost(format!(
                    "partials inconsistent with c at ({i}, {x}, {s}): \
                     dc/di {di} vs {fd_i}, dc/ds {ds} vs {fd_s}"
                )));
            }
        }
        Ok(())
    }
}

fn read_table(path: &Path, cols: usize) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() < cols {
            return Err(Error::Config(format!(
                "{}: expected {cols} columns, found {}",
                path.display(),
                rec.len()
            )));
        }
        let row = (0..cols)
            .map(|j| {
                rec[j].parse::<f64>().map_err(|e| {
                    Error::Config(format!("{}: bad number '{}': {e}", path.display(), &rec[j]))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.len() < 2 {
        return Err(Error::Config(format!("{}: table needs at least two rows", path.display())));
    }
    Ok(rows)
}

/// Values on the tensor grid `is × xs × ss`, three fields per point.
struct TensorTable {
    axes: [Vec<f64>; 3],
    values: Vec<[f64; 3]>,
}

impl TensorTable {
    fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let axis = |j: usize| {
            let mut v: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let axes = [axis(0), axis(1), axis(2)];
        let (ni, nx, ns) = (axes[0].len(), axes[1].len(), axes[2].len());
        if ni < 2 || nx < 2 || ns < 2 || ni * nx * ns != rows.len() {
            return Err(Error::Config(
                "general cost table must cover a full (i, x, s) tensor grid".into(),
            ));
        }
        let mut values = vec![[f64::NAN; 3]; rows.len()];
        for r in rows {
            let a = axes[0].partition_point(|&v| v < r[0]);
            let b = axes[1].partition_point(|&v| v < r[1]);
            let c = axes[2].partition_point(|&v| v < r[2]);
            values[(a * nx + b) * ns + c] = [r[3], r[4], r[5]];
        }
        Ok(Self { axes, values })
    }

    fn eval(&self, field: usize, i: f64, x: f64, s: f64) -> f64 {
        let q = [i, x, s];
        let mut idx = [0usize; 3];
        let mut w = [0.0; 3];
        for d in 0..3 {
            let ax = &self.axes[d];
            let k = bracket(ax, q[d]);
            idx[d] = k;
            w[d] = ((q[d] - ax[k]) / (ax[k + 1] - ax[k])).clamp(0.0, 1.0);
        }
        let (nx, ns) = (self.axes[1].len(), self.axes[2].len());
        let mut acc = 0.0;
        for corner in 0..8 {
            let (da, db, dc) = (corner & 1, (corner >> 1) & 1, (corner >> 2) & 1);
            let wt = (if da == 1 { w[0] } else { 1.0 - w[0] })
                * (if db == 1 { w[1] } else { 1.0 - w[1] })
                * (if dc == 1 { w[2] } else { 1.0 - w[2] });
            if wt == 0.0 {
                continue;
            }
            let k = ((idx[0] + da) * nx + idx[1] + db) * ns + idx[2] + dc;
            acc += wt * self.values[k][field];
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples() -> Vec<(f64, f64, f64)> {
        let mut v = Vec::new();
        for a in -4..=4 {
            for b in a..=4 {
                for c in b..=4 {
                    v.push((a as f64 * 0.2, b as f64 * 0.2, c as f64 * 0.2));
                }
            }
        }
        v
    }

    #[test]
    fn proportional_range_is_separable() {
        let c = CostFunction::proportional_range(2.0).unwrap();
        assert_eq!(c.value(-0.5, 0.0, 0.25), 1.5);
        assert_eq!(c.dc_di(-0.5, 0.0, 0.25), -2.0);
        assert_eq!(c.dc_ds(-0.5, 0.0, 0.25), 2.0);
        c.check(&samples()).unwrap();
    }

    #[test]
    fn increasing_in_i_rejected() {
        let bad = CostFunction::general(
            Arc::new(|i: f64, _, _| 2.0 + i),
            Arc::new(|_, _, _| 1.0),
            Arc::new(|_, _, _| 0.0),
        );
        assert!(bad.check(&samples()).is_err());
    }

    #[test]
    fn inconsistent_partials_rejected() {
        let bad = CostFunction::general(
            Arc::new(|i: f64, _, s: f64| 3.0 + s - i),
            Arc::new(|_, _, _| -2.0),
            Arc::new(|_, _, _| 1.0),
        );
        assert!(bad.check(&samples()).is_err());
    }

    #[test]
    fn nonpositive_constant_rejected() {
        assert!(CostFunction::constant(0.0).is_err());
    }
}
