//! The range problem simulated directly on `X` from a state `(i, x, s)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::diffusion::TransformedModel;
use crate::error::{Error, Result};
use crate::sim::path::{advance, bridge_max, bridge_min, central_derivative, normal, path_rng};
use crate::sim::rule::RuleState;
use crate::sim::{check_censoring, Estimate, Extrema, LossReport, PathConfig, Scheme, StoppingRule};
use crate::surface::CostFunction;

#[derive(Clone, Copy, Debug, Default)]
struct Outcome {
    tau: f64,
    censored: bool,
    left_grid: bool,
    range: f64,
    cost: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RangeTraceRow {
    pub t: f64,
    pub x: f64,
    pub i: f64,
    pub s: f64,
    /// `f*(I, S)` and `g*(I, S)` for the extremal rule, `NaN` otherwise.
    pub f_star: f64,
    pub g_star: f64,
    pub stopped: bool,
}

struct Ctx<'a> {
    model: &'a TransformedModel,
    cost: &'a CostFunction,
    start: (f64, f64, f64),
    rule: &'a StoppingRule,
    config: &'a PathConfig,
}

fn check_inputs(model: &TransformedModel, start: (f64, f64, f64), config: &PathConfig) -> Result<()> {
    config.validate()?;
    let (i, x, s) = start;
    let t = model.truncation();
    if !(i <= x && x <= s && t.contains(i) && t.contains(s)) {
        return Err(Error::InvalidArgument(format!(
            "start ({i}, {x}, {s}) must satisfy i <= x <= s inside [{}, {}]",
            t.lo, t.hi
        )));
    }
    Ok(())
}

/// Estimates `E[R_τ - ∫_0^τ c(I, X, S) dt]` for `rule` started at `start`.
pub fn simulate_range_objective(
    model: &TransformedModel,
    cost: &CostFunction,
    start: (f64, f64, f64),
    rule: &StoppingRule,
    config: &PathConfig,
) -> Result<LossReport> {
    check_inputs(model, start, config)?;
    let ctx = Ctx {
        model,
        cost,
        start,
        rule,
        config,
    };
    let outcomes: Vec<Outcome> = (0..config.n_paths)
        .into_par_iter()
        .map(|k| run_path(&ctx, k, None))
        .collect();
    let report = summarize(rule, &outcomes);
    check_censoring(&report, config.censoring_cap)?;
    Ok(report)
}

/// Replays path `index` of [`simulate_range_objective`] step by step.
pub fn trace_range_path(
    model: &TransformedModel,
    cost: &CostFunction,
    start: (f64, f64, f64),
    rule: &StoppingRule,
    config: &PathConfig,
    index: usize,
) -> Result<Vec<RangeTraceRow>> {
    check_inputs(model, start, config)?;
    let ctx = Ctx {
        model,
        cost,
        start,
        rule,
        config,
    };
    let mut rows = Vec::new();
    run_path(&ctx, index, Some(&mut rows));
    Ok(rows)
}

fn summarize(rule: &StoppingRule, outcomes: &[Outcome]) -> LossReport {
    let n = outcomes.len();
    let col = |f: &dyn Fn(&Outcome) -> f64| -> Vec<f64> { outcomes.iter().map(f).collect() };
    let censored = outcomes.iter().filter(|o| o.censored).count();
    LossReport {
        rule: rule.description(),
        n_paths: n,
        censored,
        censoring_rate: censored as f64 / n as f64,
        left_grid: outcomes.iter().filter(|o| o.left_grid).count(),
        e_tau: Estimate::from_samples(&col(&|o| o.tau)),
        e_range: Estimate::from_samples(&col(&|o| o.range)),
        range_payoff: Estimate::from_samples(&col(&|o| o.range - o.cost)),
        ..Default::default()
    }
}

fn run_path(ctx: &Ctx, index: usize, mut trace: Option<&mut Vec<RangeTraceRow>>) -> Outcome {
    let Ctx {
        model,
        cost,
        start,
        rule,
        config,
    } = *ctx;
    let dt = config.dt;
    let natural = model.is_natural_scale();
    let support = model.support();
    let mut rng = path_rng(config.seed, index);
    let (mut i, mut x, mut s) = start;
    let mut state = RuleState::new(rule);
    let mut stopped = state.should_stop(i, x, s);
    let mut running_cost = 0.0;
    let mut c_prev = cost.value(i, x, s);
    let mut record = |t, x, i, s, state: &mut RuleState, stopped| {
        if let Some(rows) = trace.as_deref_mut() {
            let (f_star, g_star) = state.bounds(i, s);
            rows.push(RangeTraceRow {
                t,
                x,
                i,
                s,
                f_star,
                g_star,
                stopped,
            });
        }
    };
    record(0.0, x, i, s, &mut state, stopped);

    let max_steps = config.max_steps();
    let mut k = 0;
    while !stopped && k < max_steps {
        let (mu, sigma) = if natural {
            (0.0, 1.0)
        } else {
            (model.mu(x), model.sigma(x))
        };
        let dsigma = match config.scheme {
            Scheme::Milstein if !natural => central_derivative(|u| model.sigma(support.clamp(u)), x),
            _ => 0.0,
        };
        let xi = normal(&mut rng);
        let mut x_new = advance(config.scheme, x, mu, sigma, dsigma, dt, xi);
        if !natural {
            x_new = support.clamp(x_new);
        }
        let var = sigma * sigma * dt;
        let (i_new, s_new) = match config.extrema {
            Extrema::Bridge => (
                bridge_min(&mut rng, x, x_new, var, i),
                bridge_max(&mut rng, x, x_new, var, s),
            ),
            Extrema::Endpoints => (i.min(x_new), s.max(x_new)),
        };
        let (i_new, s_new) = if natural {
            (i_new, s_new)
        } else {
            (support.clamp(i_new), support.clamp(s_new))
        };
        let c_new = cost.value(i_new, x_new, s_new);
        running_cost += 0.5 * dt * (c_prev + c_new);
        c_prev = c_new;
        x = x_new;
        i = i_new;
        s = s_new;
        k += 1;
        stopped = state.should_stop(i, x, s);
        record(k as f64 * dt, x, i, s, &mut state, stopped);
    }
    Outcome {
        tau: k as f64 * dt,
        censored: !stopped,
        left_grid: state.left_grid,
        range: s - i,
        cost: running_cost,
    }
}

/// One line of the `E(S_τ - I_τ) <= √3 √(Eτ)` comparison.
#[derive(Clone, Debug, Serialize)]
pub struct DoobRow {
    pub rule: String,
    pub e_range: Estimate,
    pub e_tau: Estimate,
    /// `√3 √(Eτ)` from the estimated `Eτ`.
    pub bound: f64,
    /// `bound - E(S_τ - I_τ)` with its delta-method standard error.
    pub slack: Estimate,
    /// Slack below `-3` standard errors.
    pub violated: bool,
}

/// Runs every rule from `(0, 0, 0)` on the natural-scale model and compares
/// the mean range with `√3 √(Eτ)`.
pub fn doob_type_check(
    model: &TransformedModel,
    rules: &[StoppingRule],
    config: &PathConfig,
) -> Result<Vec<DoobRow>> {
    if !model.is_natural_scale() {
        return Err(Error::InvalidArgument(
            "the range inequality is checked on the natural-scale model".into(),
        ));
    }
    config.validate()?;
    // The cost only enters the payoff, which is not used here.
    let cost = CostFunction::constant(1.0)?;
    let ctx_for = |rule| Ctx {
        model,
        cost: &cost,
        start: (0.0, 0.0, 0.0),
        rule,
        config,
    };
    let mut rows = Vec::with_capacity(rules.len());
    for rule in rules {
        let ctx = ctx_for(rule);
        let outcomes: Vec<Outcome> = (0..config.n_paths)
            .into_par_iter()
            .map(|k| run_path(&ctx, k, None))
            .collect();
        let report = summarize(rule, &outcomes);
        check_censoring(&report, config.censoring_cap)?;
        rows.push(doob_row(rule, &outcomes));
    }
    Ok(rows)
}

fn doob_row(rule: &StoppingRule, outcomes: &[Outcome]) -> DoobRow {
    let taus: Vec<f64> = outcomes.iter().map(|o| o.tau).collect();
    let ranges: Vec<f64> = outcomes.iter().map(|o| o.range).collect();
    let e_tau = Estimate::from_samples(&taus);
    let e_range = Estimate::from_samples(&ranges);
    let bound = 3f64.sqrt() * e_tau.mean.sqrt();
    let slack = if e_tau.mean > 0.0 {
        // Linearise √3 √(mean τ) around the sample mean; the per-path
        // influence values then carry the covariance with the range.
        let w = 3f64.sqrt() / (2.0 * e_tau.mean.sqrt());
        let infl: Vec<f64> = outcomes
            .iter()
            .map(|o| w * (o.tau - e_tau.mean) - (o.range - e_range.mean))
            .collect();
        Estimate {
            mean: bound - e_range.mean,
            se: Estimate::from_samples(&infl).se,
        }
    } else {
        Estimate {
            mean: bound - e_range.mean,
            se: e_range.se,
        }
    };
    DoobRow {
        rule: rule.description(),
        e_range,
        e_tau,
        bound,
        violated: slack.mean < -3.0 * slack.se,
        slack,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::Interval;

    fn natural() -> TransformedModel {
        TransformedModel::natural_scale(Interval::new(-3.0, 3.0).unwrap()).unwrap()
    }

    fn small(n: usize) -> PathConfig {
        PathConfig {
            dt: 1e-3,
            horizon: 20.0,
            n_paths: n,
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn immediate_pays_the_initial_range() {
        let cost = CostFunction::proportional_range(1.0).unwrap();
        let r = simulate_range_objective(&natural(), &cost, (-0.4, 0.1, 0.5), &StoppingRule::Immediate, &small(10))
            .unwrap();
        assert!((r.range_payoff.mean - 0.9).abs() < 1e-15);
        assert!(r.range_payoff.se < 1e-15);
    }

    #[test]
    fn threshold_rule_stops_at_its_range() {
        let cost = CostFunction::constant(1.0).unwrap();
        let rule = StoppingRule::range_threshold(0.5).unwrap();
        let r = simulate_range_objective(&natural(), &cost, (0.0, 0.0, 0.0), &rule, &small(4000)).unwrap();
        // Exit time of a Brownian range from 0 to r has mean r²/2.
        assert!((r.e_tau.mean - 0.125).abs() < 4.0 * r.e_tau.se + 0.01, "{:?}", r.e_tau);
        assert!(r.e_range.mean >= 0.5);
    }

    #[test]
    fn rejects_start_outside_truncation() {
        let cost = CostFunction::constant(1.0).unwrap();
        let e = simulate_range_objective(&natural(), &cost, (0.2, 0.0, 0.5), &StoppingRule::Immediate, &small(1));
        assert!(e.is_err());
    }

    #[test]
    fn doob_rows_for_trivial_rule() {
        let rows = doob_type_check(&natural(), &[StoppingRule::Immediate], &small(5)).unwrap();
        assert_eq!(rows[0].bound, 0.0);
        assert_eq!(rows[0].e_range.mean, 0.0);
        assert!(!rows[0].violated);
    }
}
