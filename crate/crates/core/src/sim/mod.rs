//! Monte Carlo harness: the observed diffusion with a hidden level, the
//! range problem run directly on `X`, and the stopping rules compared.

pub mod detection;
pub mod path;
pub mod range;
pub mod rule;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::interp::pairwise_sum;

pub use detection::{simulate_detection, trace_detection_path, DetectionTraceRow};
pub use range::{doob_type_check, simulate_range_objective, trace_range_path, DoobRow, RangeTraceRow};
pub use rule::StoppingRule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    EulerMaruyama,
    Milstein,
}

/// How running extrema are updated within a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Extrema {
    /// Within-step extremes drawn from the Brownian bridge between the
    /// endpoints, diffusion coefficient frozen at the left end.
    Bridge,
    /// Step endpoints only; level crossings still get the bridge
    /// crossing-probability correction.
    Endpoints,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct PathConfig {
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub scheme: Scheme,
    pub extrema: Extrema,
    /// Largest tolerated fraction of paths reaching the horizon.
    pub censoring_cap: f64,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            horizon: 50.0,
            n_paths: 100_000,
            seed: 0,
            scheme: Scheme::EulerMaruyama,
            extrema: Extrema::Bridge,
            censoring_cap: 0.01,
        }
    }
}

impl PathConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return Err(Error::Config(format!(
                "horizon {} must be finite and at least dt",
                self.horizon
            )));
        }
        if self.n_paths == 0 {
            return Err(Error::Config("n_paths must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.censoring_cap) {
            return Err(Error::Config("censoring_cap must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub(crate) fn max_steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    /// Mean and standard error by pairwise summation, so the result does
    /// not depend on how the samples were produced in parallel.
    pub fn from_samples(v: &[f64]) -> Self {
        let n = v.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                se: f64::NAN,
            };
        }
        let mean = pairwise_sum(v) / n as f64;
        if n == 1 {
            return Self { mean, se: 0.0 };
        }
        let dev: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = pairwise_sum(&dev) / (n - 1) as f64;
        Self {
            mean,
            se: (var / n as f64).sqrt(),
        }
    }

    /// Whether `|self - other| <= k` pooled standard errors.
    pub fn agrees_with(&self, other: &Estimate, k: f64) -> bool {
        (self.mean - other.mean).abs() <= k * self.se.hypot(other.se)
    }

    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.se
    }
}

/// Monte Carlo summary for one rule.
#[derive(Clone, Debug, Default, Serialize)]
pub struct LossReport {
    pub rule: String,
    pub n_paths: usize,
    pub censored: usize,
    pub censoring_rate: f64,
    /// Paths whose running extrema left the grid the rule was solved on
    /// (extremal rule only); the rule is clamped to the grid edge there.
    pub left_grid: usize,
    /// `P(τ < τ_ℓ)` (detection only).
    pub p_early: Option<Estimate>,
    /// `E(τ - τ_ℓ)⁺` (detection only).
    pub e_late: Option<Estimate>,
    /// `p_early + c e_late` (detection only).
    pub combined: Option<Estimate>,
    /// The same loss as `1 - E[F(S_τ) - F(I_τ) - c ∫ (F(S) - F(I)) dt]` on the
    /// same paths (detection only).
    pub transformed: Option<Estimate>,
    /// Paired difference `combined - transformed` (detection only).
    pub identity_gap: Option<Estimate>,
    pub e_tau: Estimate,
    /// `E(S_τ - I_τ)` in the transformed coordinates.
    pub e_range: Estimate,
    /// `E[R_τ - ∫_0^τ c dt]` in the transformed coordinates.
    pub range_payoff: Estimate,
}

pub(crate) fn check_censoring(report: &LossReport, cap: f64) -> Result<()> {
    if report.censoring_rate > cap {
        return Err(Error::ExcessiveCensoring {
            rate: report.censoring_rate,
            cap,
        });
    }
    Ok(())
}
