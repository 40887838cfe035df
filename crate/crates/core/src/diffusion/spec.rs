use std::fmt;
use std::sync::Arc;

use log::warn;

use crate::error::{Error, Result};
use crate::numerics::normal;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Closed interval; either end may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidArgument(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub const fn real_line() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Time-homogeneous diffusion `dZ = a(Z) dt + b(Z) dB`.
#[derive(Clone)]
pub struct DiffusionSpec {
    drift: ScalarFn,
    diffusion: ScalarFn,
    domain: Interval,
}

impl fmt::Debug for DiffusionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffusionSpec")
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

/// Outcome of [`DiffusionSpec::check`].
#[derive(Clone, Debug)]
pub struct DiffusionCheck {
    pub min_b: f64,
    /// Largest observed |b²(z1) - b²(z2)| / |z1 - z2| over adjacent samples.
    pub b2_lipschitz: f64,
    pub warnings: Vec<String>,
}

impl DiffusionSpec {
    pub fn new(drift: ScalarFn, diffusion: ScalarFn, domain: Interval) -> Self {
        Self {
            drift,
            diffusion,
            domain,
        }
    }

    /// Standard Brownian motion on the real line.
    pub fn brownian() -> Self {
        Self::new(Arc::new(|_| 0.0), Arc::new(|_| 1.0), Interval::real_line())
    }

    pub fn drift(&self, z: f64) -> f64 {
        (self.drift)(z)
    }

    pub fn diffusion(&self, z: f64) -> f64 {
        (self.diffusion)(z)
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// Checks positivity of `b` on `samples`; flags a large Lipschitz ratio
    /// of `b²` as a warning rather than an error.
    pub fn check(&self, samples: &[f64]) -> Result<DiffusionCheck> {
        let mut min_b = f64::INFINITY;
        for &z in samples {
            let b = self.diffusion(z);
            if !(b > 0.0) || !b.is_finite() {
                return Err(Error::NonPositiveDiffusion { z, value: b });
            }
            if !self.drift(z).is_finite() {
                return Err(Error::InvalidArgument(format!("drift is not finite at z = {z}")));
            }
            min_b = min_b.min(b);
        }
        let mut sorted: Vec<f64> = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut lip: f64 = 0.0;
        for w in sorted.windows(2) {
            let dz = w[1] - w[0];
            if dz > 0.0 {
                let d = (self.diffusion(w[1]).powi(2) - self.diffusion(w[0]).powi(2)).abs() / dz;
                lip = lip.max(d);
            }
        }
        let mut warnings = Vec::new();
        if lip > 1e6 {
            let msg = format!("b^2 looks non-Lipschitz on the sample grid (ratio {lip:.3e})");
            warn!("{msg}");
            warnings.push(msg);
        }
        Ok(DiffusionCheck {
            min_b,
            b2_lipschitz: lip,
            warnings,
        })
    }
}

/// Law of the hidden level: distribution function with two derivatives and
/// its inverse. `upper_quantile(q)` must return `F^{-1}(1 - q)` and is used
/// for accuracy near the upper end.
#[derive(Clone)]
pub struct HiddenLevelLaw {
    cdf: ScalarFn,
    pdf: ScalarFn,
    pdf_derivative: ScalarFn,
    quantile: ScalarFn,
    upper_quantile: ScalarFn,
}

impl fmt::Debug for HiddenLevelLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HiddenLevelLaw").finish_non_exhaustive()
    }
}

impl HiddenLevelLaw {
    pub fn new(cdf: ScalarFn, pdf: ScalarFn, pdf_derivative: ScalarFn, quantile: ScalarFn) -> Self {
        let q = quantile.clone();
        Self {
            cdf,
            pdf,
            pdf_derivative,
            quantile,
            upper_quantile: Arc::new(move |u| q(1.0 - u)),
        }
    }

    pub fn with_upper_quantile(mut self, upper: ScalarFn) -> Self {
        self.upper_quantile = upper;
        self
    }

    pub fn standard_normal() -> Self {
        Self::new(
            Arc::new(normal::cdf),
            Arc::new(normal::pdf),
            Arc::new(|z| -z * normal::pdf(z)),
            Arc::new(normal::quantile),
        )
        .with_upper_quantile(Arc::new(normal::upper_quantile))
    }

    pub fn cdf(&self, z: f64) -> f64 {
        (self.cdf)(z)
    }

    pub fn pdf(&self, z: f64) -> f64 {
        (self.pdf)(z)
    }

    pub fn pdf_derivative(&self, z: f64) -> f64 {
        (self.pdf_derivative)(z)
    }

    pub fn quantile(&self, u: f64) -> f64 {
        (self.quantile)(u)
    }

    pub fn upper_quantile(&self, q: f64) -> f64 {
        (self.upper_quantile)(q)
    }

    /// Level `z` with `2 F(z) - 1 = x`, evaluated on the accurate side.
    pub fn level_of_x(&self, x: f64) -> f64 {
        if x <= 0.0 {
            self.quantile(0.5 * (1.0 + x))
        } else {
            self.upper_quantile(0.5 * (1.0 - x))
        }
    }

    /// Checks monotonicity, the quantile round trip and derivative
    /// consistency on sample levels.
    pub fn check(&self, samples: &[f64]) -> Result<()> {
        let mut sorted: Vec<f64> = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        for w in sorted.windows(2) {
            if w[1] > w[0] && self.cdf(w[1]) <= self.cdf(w[0]) {
                return Err(Error::InvalidLaw(format!(
                    "F is not strictly increasing between {} and {}",
                    w[0], w[1]
                )));
            }
        }
        for &z in &sorted {
            let u = self.cdf(z);
            if !(0.0 < u && u < 1.0) {
                continue;
            }
            let d = self.pdf(z);
            if !(d > 0.0) {
                return Err(Error::InvalidLaw(format!("F'({z}) = {d} is not positive")));
            }
            let back = self.cdf(self.quantile(u));
            if (back - u).abs() > 1e-9 {
                return Err(Error::InvalidLaw(format!(
                    "F(F^-1({u})) = {back} does not round-trip"
                )));
            }
            let h = 1e-5 * (1.0 + z.abs());
            let fd = (self.cdf(z + h) - self.cdf(z - h)) / (2.0 * h);
            if (fd - d).abs() > 1e-5 * (1.0 + d.abs()) {
                return Err(Error::InvalidLaw(format!(
                    "F' inconsistent with F at z = {z}: {d} vs {fd}"
                )));
            }
            let fd2 = (self.pdf(z + h) - self.pdf(z - h)) / (2.0 * h);
            let d2 = self.pdf_derivative(z);
            if (fd2 - d2).abs() > 1e-4 * (1.0 + d2.abs()) {
                return Err(Error::InvalidLaw(format!(
                    "F'' inconsistent with F' at z = {z}: {d2} vs {fd2}"
                )));
            }
        }
        Ok(())
    }
}
