//! The observed diffusion `Z` with a hidden level `ℓ`.
//!
//! Per path: `ℓ` is drawn from the law, `Z` starts at the median of `ℓ`
//! (so `X_0 = 0`) and the rule is evaluated on `(I^X, X, S^X)` after every
//! step. With bridge extrema, `τ_ℓ` is taken at the midpoint of the first
//! step whose range `[I^Z, S^Z]` covers `ℓ`, and `∫ (F(S) - F(I)) dt` uses
//! the trapezoid rule; with these two choices the direct and transformed
//! losses agree path by path once averaged over `ℓ`.

use rayon::prelude::*;
use serde::Serialize;

use crate::diffusion::{DiffusionSpec, HiddenLevelLaw};
use crate::error::{Error, Result};
use crate::sim::path::{
    advance, bridge_crossing_probability, bridge_max, bridge_min, central_derivative, normal,
    path_rng, uniform_interior,
};
use crate::sim::rule::RuleState;
use crate::sim::{check_censoring, Estimate, Extrema, LossReport, PathConfig, Scheme, StoppingRule};

#[derive(Clone, Copy, Debug, Default)]
struct Outcome {
    tau: f64,
    censored: bool,
    left_grid: bool,
    early: f64,
    late: f64,
    /// `F(S) - F(I)` at `τ`.
    covered: f64,
    /// `∫_0^τ (F(S) - F(I)) dt`.
    covered_time: f64,
}

/// One row of a per-path trace.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DetectionTraceRow {
    pub t: f64,
    pub z: f64,
    pub x: f64,
    pub i_z: f64,
    pub s_z: f64,
    pub i_x: f64,
    pub s_x: f64,
    pub level: f64,
    pub level_reached: bool,
    pub stopped: bool,
}

struct Ctx<'a> {
    spec: &'a DiffusionSpec,
    law: &'a HiddenLevelLaw,
    rule: &'a StoppingRule,
    config: &'a PathConfig,
}

fn check_inputs(c: f64, config: &PathConfig) -> Result<()> {
    config.validate()?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("cost constant must be positive, got {c}")));
    }
    Ok(())
}

/// Estimates `P(τ < τ_ℓ) + c E(τ - τ_ℓ)⁺` and its transformed counterpart
/// for `rule`. Paths reaching the horizon are counted as stopped there.
pub fn simulate_detection(
    spec: &DiffusionSpec,
    law: &HiddenLevelLaw,
    c: f64,
    rule: &StoppingRule,
    config: &PathConfig,
) -> Result<LossReport> {
    check_inputs(c, config)?;
    let ctx = Ctx {
        spec,
        law,
        rule,
        config,
    };
    let outcomes: Vec<Outcome> = (0..config.n_paths)
        .into_par_iter()
        .map(|k| run_path(&ctx, k, None))
        .collect();
    let report = summarize(rule, c, &outcomes);
    check_censoring(&report, config.censoring_cap)?;
    Ok(report)
}

/// Replays path `index` of [`simulate_detection`] and records every step.
pub fn trace_detection_path(
    spec: &DiffusionSpec,
    law: &HiddenLevelLaw,
    c: f64,
    rule: &StoppingRule,
    config: &PathConfig,
    index: usize,
) -> Result<Vec<DetectionTraceRow>> {
    check_inputs(c, config)?;
    let ctx = Ctx {
        spec,
        law,
        rule,
        config,
    };
    let mut rows = Vec::new();
    run_path(&ctx, index, Some(&mut rows));
    Ok(rows)
}

fn summarize(rule: &StoppingRule, c: f64, outcomes: &[Outcome]) -> LossReport {
    let n = outcomes.len();
    let col = |f: &dyn Fn(&Outcome) -> f64| -> Vec<f64> { outcomes.iter().map(f).collect() };
    let combined = |o: &Outcome| o.early + c * o.late;
    let transformed = |o: &Outcome| 1.0 - (o.covered - c * o.covered_time);
    let censored = outcomes.iter().filter(|o| o.censored).count();
    LossReport {
        rule: rule.description(),
        n_paths: n,
        censored,
        censoring_rate: censored as f64 / n as f64,
        left_grid: outcomes.iter().filter(|o| o.left_grid).count(),
        p_early: Some(Estimate::from_samples(&col(&|o| o.early))),
        e_late: Some(Estimate::from_samples(&col(&|o| o.late))),
        combined: Some(Estimate::from_samples(&col(&combined))),
        transformed: Some(Estimate::from_samples(&col(&transformed))),
        identity_gap: Some(Estimate::from_samples(&col(&|o| combined(o) - transformed(o)))),
        e_tau: Estimate::from_samples(&col(&|o| o.tau)),
        e_range: Estimate::from_samples(&col(&|o| 2.0 * o.covered)),
        range_payoff: Estimate::from_samples(&col(&|o| 2.0 * (o.covered - c * o.covered_time))),
    }
}

fn run_path(ctx: &Ctx, index: usize, mut trace: Option<&mut Vec<DetectionTraceRow>>) -> Outcome {
    let Ctx {
        spec,
        law,
        rule,
        config,
    } = *ctx;
    let dt = config.dt;
    let domain = spec.domain();
    let mut rng = path_rng(config.seed, index);
    let level = law.quantile(uniform_interior(&mut rng));
    let z0 = law.quantile(0.5);
    let (mut z, mut iz, mut sz) = (z0, z0, z0);
    let (mut fi, mut fs) = (law.cdf(z0), law.cdf(z0));
    let mut fz = fi;
    let mut reached_at: Option<f64> = None;
    let mut covered_time = 0.0;

    let mut state = RuleState::new(rule);
    let needs_x = state.needs_x();
    let mut stopped = state.should_stop(2.0 * fi - 1.0, 2.0 * fz - 1.0, 2.0 * fs - 1.0);
    let tracing = trace.is_some();
    let mut record = |t: f64, z: f64, fz: f64, iz, sz, fi: f64, fs: f64, reached: bool, stopped| {
        if let Some(rows) = trace.as_deref_mut() {
            rows.push(DetectionTraceRow {
                t,
                z,
                x: 2.0 * fz - 1.0,
                i_z: iz,
                s_z: sz,
                i_x: 2.0 * fi - 1.0,
                s_x: 2.0 * fs - 1.0,
                level,
                level_reached: reached,
                stopped,
            });
        }
    };
    record(0.0, z, fz, iz, sz, fi, fs, false, stopped);

    let max_steps = config.max_steps();
    let mut k = 0;
    while !stopped && k < max_steps {
        let a = spec.drift(z);
        let b = spec.diffusion(z);
        let db = match config.scheme {
            Scheme::Milstein => central_derivative(|u| spec.diffusion(u), z),
            Scheme::EulerMaruyama => 0.0,
        };
        let xi = normal(&mut rng);
        let z_new = domain.clamp(advance(config.scheme, z, a, b, db, dt, xi));
        let var = b * b * dt;
        let (iz_new, sz_new) = match config.extrema {
            Extrema::Bridge => (
                bridge_min(&mut rng, z, z_new, var, iz),
                bridge_max(&mut rng, z, z_new, var, sz),
            ),
            Extrema::Endpoints => (iz.min(z_new), sz.max(z_new)),
        };
        if reached_at.is_none() {
            let hit = match config.extrema {
                Extrema::Bridge => iz_new <= level && level <= sz_new,
                Extrema::Endpoints => {
                    let p = bridge_crossing_probability(z, z_new, var, level);
                    p >= 1.0 || (p > 1e-300 && uniform_interior(&mut rng) < p)
                }
            };
            if hit {
                reached_at = Some((k as f64 + 0.5) * dt);
            }
        }
        let before = fs - fi;
        if sz_new != sz {
            fs = law.cdf(sz_new);
        }
        if iz_new != iz {
            fi = law.cdf(iz_new);
        }
        covered_time += 0.5 * dt * (before + (fs - fi));
        z = z_new;
        iz = iz_new;
        sz = sz_new;
        k += 1;
        if needs_x || tracing {
            fz = law.cdf(z);
        }
        stopped = state.should_stop(2.0 * fi - 1.0, 2.0 * fz - 1.0, 2.0 * fs - 1.0);
        record(k as f64 * dt, z, fz, iz, sz, fi, fs, reached_at.is_some(), stopped);
    }
    let tau = k as f64 * dt;
    let (early, late) = match reached_at {
        Some(t) => (0.0, tau - t),
        None => (1.0, 0.0),
    };
    Outcome {
        tau,
        censored: !stopped,
        left_grid: state.left_grid,
        early,
        late,
        covered: fs - fi,
        covered_time,
    }
}
