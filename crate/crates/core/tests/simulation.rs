use std::sync::{Arc, OnceLock};

use htd_core::diffusion::{preset, DiffusionSpec, HiddenLevelLaw, Interval, TransformedModel};
use htd_core::sim::{
    simulate_detection, simulate_range_objective, trace_range_path, Extrema, PathConfig, Scheme, StoppingRule,
};
use htd_core::surface::{extremal_surfaces, CostFunction, Schedule, SolverOptions, SurfacePair, TriangleGrid};
use htd_core::Error;
use proptest::prelude::*;

fn natural_model() -> TransformedModel {
    TransformedModel::natural_scale(Interval::new(-8.0, 8.0).unwrap()).unwrap()
}

fn solve(model: &TransformedModel, cost: &CostFunction, nodes: usize) -> Arc<SurfacePair> {
    let grid = TriangleGrid::uniform(model.truncation(), nodes).unwrap();
    let schedule = Schedule::geometric(model, 30).unwrap();
    Arc::new(extremal_surfaces(model, cost, &grid, &schedule, &SolverOptions::default()).unwrap())
}

fn natural_surfaces() -> Arc<SurfacePair> {
    static P: OnceLock<Arc<SurfacePair>> = OnceLock::new();
    P.get_or_init(|| solve(&natural_model(), &CostFunction::constant(1.0).unwrap(), 129)).clone()
}

fn gaussian_surfaces() -> Arc<SurfacePair> {
    static P: OnceLock<Arc<SurfacePair>> = OnceLock::new();
    P.get_or_init(|| {
        let m = preset("bm-gaussian", 1e-3, 1.0).unwrap();
        solve(&m, &CostFunction::proportional_range(1.0).unwrap(), 129)
    })
    .clone()
}

fn config(n_paths: usize, seed: u64) -> PathConfig {
    PathConfig {
        dt: 1e-3,
        horizon: 20.0,
        n_paths,
        seed,
        ..Default::default()
    }
}

fn run_range(rule: &StoppingRule, cfg: &PathConfig) -> htd_core::sim::LossReport {
    let cost = CostFunction::constant(1.0).unwrap();
    simulate_range_objective(&natural_model(), &cost, (0.0, 0.0, 0.0), rule, cfg).unwrap()
}

#[test]
fn same_seed_same_report_for_any_thread_count() {
    let rule = StoppingRule::range_threshold(0.8).unwrap();
    let cfg = config(3000, 17);
    let report = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let r = pool.install(|| run_range(&rule, &cfg));
        serde_json::to_string(&r).unwrap()
    };
    let one = report(1);
    assert_eq!(one, report(3));
    assert_eq!(one, report(1));
    assert_ne!(one, serde_json::to_string(&run_range(&rule, &config(3000, 18))).unwrap());
}

// In natural scale the diffusion coefficient is constant, so the Milstein
// correction vanishes and both schemes take identical steps.
#[test]
fn milstein_equals_euler_in_natural_scale() {
    let rule = StoppingRule::range_threshold(0.5).unwrap();
    let em = run_range(&rule, &config(500, 4));
    let mil = run_range(
        &rule,
        &PathConfig {
            scheme: Scheme::Milstein,
            ..config(500, 4)
        },
    );
    assert_eq!(em.range_payoff.mean.to_bits(), mil.range_payoff.mean.to_bits());
}

#[test]
fn extremal_payoff_is_close_to_three_quarters() {
    let rule = StoppingRule::Extremal(natural_surfaces());
    let r = run_range(&rule, &config(4000, 5));
    assert_eq!(r.censored, 0);
    assert_eq!(r.left_grid, 0);
    assert!(r.range_payoff.within(0.75, 4.0), "{:?}", r.range_payoff);
    // Unit cost: the running cost is the elapsed time.
    let identity = r.e_range.mean - r.e_tau.mean - r.range_payoff.mean;
    assert!(identity.abs() < 1e-9, "{identity}");
}

// Endpoint monitoring misses within-step excursions, so it stops later.
#[test]
fn endpoint_monitoring_is_biased_low() {
    let rule = StoppingRule::Extremal(natural_surfaces());
    let bridge = run_range(&rule, &config(4000, 6));
    let ends = run_range(
        &rule,
        &PathConfig {
            extrema: Extrema::Endpoints,
            ..config(4000, 6)
        },
    );
    assert!(ends.range_payoff.mean < bridge.range_payoff.mean);
}

#[test]
fn excessive_censoring_is_an_error() {
    let rule = StoppingRule::range_threshold(5.0).unwrap();
    let e = simulate_range_objective(
        &natural_model(),
        &CostFunction::constant(1.0).unwrap(),
        (0.0, 0.0, 0.0),
        &rule,
        &PathConfig {
            horizon: 0.5,
            ..config(200, 1)
        },
    );
    assert!(matches!(e, Err(Error::ExcessiveCensoring { .. })), "{e:?}");
}

#[test]
fn detection_losses_agree_for_extremal_rule() {
    let rule = StoppingRule::Extremal(gaussian_surfaces());
    let r = simulate_detection(
        &DiffusionSpec::brownian(),
        &HiddenLevelLaw::standard_normal(),
        1.0,
        &rule,
        &config(2000, 9),
    )
    .unwrap();
    let gap = r.identity_gap.unwrap();
    assert!(gap.within(0.0, 3.0), "{gap:?}");
    // 1 - V/2 with V = 0.5817 from the value module.
    assert!(r.combined.unwrap().within(0.70915, 4.0), "{:?}", r.combined);
    assert!(r.e_range.mean <= 2.0);
}

#[test]
fn quantile_hit_at_the_median_stops_at_once() {
    let r = simulate_detection(
        &DiffusionSpec::brownian(),
        &HiddenLevelLaw::standard_normal(),
        1.0,
        &StoppingRule::quantile_hit(0.5).unwrap(),
        &config(100, 2),
    )
    .unwrap();
    assert_eq!(r.e_tau.mean, 0.0);
    assert_eq!(r.combined.unwrap().mean, 1.0);
    assert_eq!(r.identity_gap.unwrap().mean, 0.0);
}

#[test]
fn rejects_invalid_config() {
    let rule = StoppingRule::Immediate;
    for cfg in [
        PathConfig { dt: 0.0, ..config(10, 0) },
        PathConfig { n_paths: 0, ..config(10, 0) },
        PathConfig { horizon: -1.0, ..config(10, 0) },
    ] {
        let e = simulate_range_objective(
            &natural_model(),
            &CostFunction::constant(1.0).unwrap(),
            (0.0, 0.0, 0.0),
            &rule,
            &cfg,
        );
        assert!(e.is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // f* - g* is decreasing along a path, so once the state leaves C0 it
    // never returns; the extremal rule then stops as soon as X is in [f*, g*].
    #[test]
    fn traced_extremal_paths_respect_the_regions(index in 0usize..10_000) {
        let p = natural_surfaces();
        let rule = StoppingRule::Extremal(p);
        let rows = trace_range_path(
            &natural_model(),
            &CostFunction::constant(1.0).unwrap(),
            (0.0, 0.0, 0.0),
            &rule,
            &config(1, 21),
            index,
        )
        .unwrap();
        let mut left_c0 = false;
        for r in &rows {
            prop_assert!(r.i <= r.x && r.x <= r.s);
            let in_c0 = r.f_star > r.g_star;
            prop_assert!(!(left_c0 && in_c0), "re-entered C0 at t = {}", r.t);
            left_c0 |= !in_c0;
            let inside = !in_c0 && r.f_star <= r.x && r.x <= r.g_star;
            prop_assert_eq!(r.stopped, inside);
        }
        prop_assert!(rows.last().unwrap().stopped);
    }

    #[test]
    fn immediate_rule_pays_the_initial_range(i in -2.0f64..0.0, w in 0.0f64..2.0, u in 0.0f64..=1.0) {
        let s = i + w;
        let x = i * (1.0 - u) + s * u;
        let r = simulate_range_objective(
            &natural_model(),
            &CostFunction::constant(1.0).unwrap(),
            (i, x, s),
            &StoppingRule::Immediate,
            &config(3, 0),
        )
        .unwrap();
        prop_assert!((r.range_payoff.mean - (s - i)).abs() <= 1e-12);
        prop_assert_eq!(r.e_tau.mean, 0.0);
    }

    #[test]
    fn threshold_rule_reaches_its_range(r in 0.1f64..1.0, seed in 0u64..1000) {
        let rule = StoppingRule::range_threshold(r).unwrap();
        let rep = run_range(&rule, &config(50, seed));
        prop_assert_eq!(rep.censored, 0);
        prop_assert!(rep.e_range.mean >= r);
    }
}
