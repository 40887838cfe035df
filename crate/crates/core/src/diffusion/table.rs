//! Diffusion and hidden-level law read from a tabulated CSV with columns
//! `z, a, b, F, F1, F2` (F1 = F', F2 = F'').

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::diffusion::spec::{DiffusionSpec, HiddenLevelLaw, Interval};
use crate::error::{Error, Result};
use crate::numerics::interp::{bracket, HermiteTable};

#[derive(Debug, Deserialize)]
struct Row {
    z: f64,
    a: f64,
    b: f64,
    #[serde(rename = "F")]
    f: f64,
    #[serde(rename = "F1")]
    f1: f64,
    #[serde(rename = "F2")]
    f2: f64,
}

#[derive(Clone, Debug)]
pub struct CoefficientTable {
    z: Vec<f64>,
    drift: HermiteTable,
    diffusion: HermiteTable,
    cdf: HermiteTable,
    pdf: HermiteTable,
    pdf_derivative: HermiteTable,
}

impl CoefficientTable {
    pub fn from_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut rows = Vec::new();
        for r in rdr.deserialize() {
            let row: Row = r?;
            rows.push(row);
        }
        Self::from_rows(rows.into_iter().map(|r| [r.z, r.a, r.b, r.f, r.f1, r.f2]).collect())
    }

    /// Rows of `[z, a, b, F, F', F'']` sorted by `z`.
    pub fn from_rows(rows: Vec<[f64; 6]>) -> Result<Self> {
        if rows.len() < 4 {
            return Err(Error::Config("coefficient table needs at least 4 rows".into()));
        }
        let col = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<f64>>();
        let z = col(0);
        if z.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("table z column must be strictly increasing".into()));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Config("table contains non-finite entries".into()));
        }
        let f = col(3);
        if f.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidLaw("tabulated F is not strictly increasing".into()));
        }
        let f1 = col(4);
        let f2 = col(5);
        Ok(Self {
            drift: HermiteTable::from_values(z.clone(), col(1), false),
            diffusion: HermiteTable::from_values(z.clone(), col(2), false),
            cdf: HermiteTable::new(z.clone(), f, f1.clone()),
            pdf: HermiteTable::new(z.clone(), f1, f2.clone()),
            pdf_derivative: HermiteTable::from_values(z.clone(), f2, false),
            z,
        })
    }

    pub fn domain(&self) -> Interval {
        Interval {
            lo: self.z[0],
            hi: self.z[self.z.len() - 1],
        }
    }

    pub fn diffusion_spec(&self) -> DiffusionSpec {
        let d = Arc::new(self.drift.clone());
        let s = Arc::new(self.diffusion.clone());
        let dom = self.domain();
        DiffusionSpec::new(
            Arc::new(move |z| d.eval(dom.clamp(z))),
            Arc::new(move |z| s.eval(dom.clamp(z))),
            dom,
        )
    }

    pub fn law(&self) -> HiddenLevelLaw {
        let dom = self.domain();
        let cdf = Arc::new(self.cdf.clone());
        let pdf = Arc::new(self.pdf.clone());
        let dpdf = Arc::new(self.pdf_derivative.clone());
        let c1 = cdf.clone();
        let c2 = cdf.clone();
        HiddenLevelLaw::new(
            Arc::new(move |z| c1.eval(dom.clamp(z))),
            Arc::new(move |z| pdf.eval(dom.clamp(z))),
            Arc::new(move |z| dpdf.eval(dom.clamp(z))),
            Arc::new(move |u| invert(&c2, u)),
        )
    }
}

fn invert(cdf: &HermiteTable, u: f64) -> f64 {
    let n = cdf.len();
    if u <= cdf.y[0] {
        return cdf.x[0];
    }
    if u >= cdf.y[n - 1] {
        return cdf.x[n - 1];
    }
    let k = bracket(&cdf.y, u);
    let (mut lo, mut hi) = (cdf.x[k], cdf.x[k + 1]);
    let mut z = 0.5 * (lo + hi);
    for _ in 0..100 {
        let v = cdf.eval(z) - u;
        if v == 0.0 {
            return z;
        }
        if v > 0.0 {
            hi = z;
        } else {
            lo = z;
        }
        if (hi - lo) <= 4.0 * f64::EPSILON * (1.0 + z.abs()) {
            break;
        }
        let d = cdf.slope(z);
        let step = if d > 0.0 { v / d } else { f64::NAN };
        let newton = z - step;
        if newton >= lo && newton <= hi {
            z = newton;
            if step.abs() <= f64::EPSILON * (1.0 + z.abs()) {
                break;
            }
        } else {
            z = 0.5 * (lo + hi);
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::normal;

    #[test]
    fn tabulated_normal_round_trips() {
        let rows: Vec<[f64; 6]> = (0..=400)
            .map(|k| {
                let z = -8.0 + k as f64 * 0.04;
                [z, 0.0, 1.0, normal::cdf(z), normal::pdf(z), -z * normal::pdf(z)]
            })
            .collect();
        let t = CoefficientTable::from_rows(rows).unwrap();
        let law = t.law();
        for &u in &[0.01, 0.3, 0.5, 0.9] {
            let z = law.quantile(u);
            assert!((z - normal::quantile(u)).abs() < 1e-6, "u={u} z={z} ref={}", normal::quantile(u));
        }
        assert_eq!(t.diffusion_spec().diffusion(1.3), 1.0);
    }

    #[test]
    fn non_monotone_cdf_rejected() {
        let rows = vec![
            [0.0, 0.0, 1.0, 0.1, 1.0, 0.0],
            [1.0, 0.0, 1.0, 0.3, 1.0, 0.0],
            [2.0, 0.0, 1.0, 0.2, 1.0, 0.0],
            [3.0, 0.0, 1.0, 0.9, 1.0, 0.0],
        ];
        assert!(CoefficientTable::from_rows(rows).is_err());
    }
}
