use std::sync::OnceLock;

use approx::assert_abs_diff_eq;
use htd_core::diffusion::{preset, Interval, TransformedModel};
use htd_core::oracle::TrinomialDp;
use htd_core::surface::{extremal_surfaces, CostFunction, Schedule, SolverOptions, SurfacePair, TriangleGrid};
use htd_core::value::{freeboundary_residuals, Region, ValueField, ValueOptions};
use proptest::prelude::*;

fn solve(model: TransformedModel, cost: CostFunction, nodes: usize) -> SurfacePair {
    let grid = TriangleGrid::uniform(model.truncation(), nodes).unwrap();
    let schedule = Schedule::geometric(&model, 30).unwrap();
    extremal_surfaces(&model, &cost, &grid, &schedule, &SolverOptions::default()).unwrap()
}

fn natural() -> &'static ValueField<'static> {
    static P: OnceLock<SurfacePair> = OnceLock::new();
    static V: OnceLock<ValueField<'static>> = OnceLock::new();
    V.get_or_init(|| {
        let p = P.get_or_init(|| {
            let m = TransformedModel::natural_scale(Interval::new(-3.0, 3.0).unwrap()).unwrap();
            solve(m, CostFunction::constant(1.0).unwrap(), 129)
        });
        ValueField::new(p, ValueOptions::default()).unwrap()
    })
}

fn gaussian() -> &'static ValueField<'static> {
    static P: OnceLock<SurfacePair> = OnceLock::new();
    static V: OnceLock<ValueField<'static>> = OnceLock::new();
    V.get_or_init(|| {
        let p = P.get_or_init(|| {
            let m = preset("bm-gaussian", 1e-3, 1.0).unwrap();
            solve(m, CostFunction::proportional_range(1.0).unwrap(), 129)
        });
        ValueField::new(p, ValueOptions::default()).unwrap()
    })
}

#[test]
fn natural_scale_value_at_origin() {
    let e = natural().eval(0.0, 0.0, 0.0).unwrap();
    assert_eq!(e.region, Region::C0);
    assert_abs_diff_eq!(e.value, 0.75, epsilon = 1e-6);
    assert!(e.gap < 1e-5, "gap {}", e.gap);
}

// With f* = i + 1/2 and g* = s - 1/2 the value off C0 is the range plus
// the squared distance to the nearer boundary.
#[test]
fn natural_scale_value_off_c0() {
    let v = natural();
    let e = v.eval(-1.5, 0.4, 0.5).unwrap();
    assert_eq!(e.region, Region::CPlus);
    assert_abs_diff_eq!(e.value, 2.0 + 0.4 * 0.4, epsilon = 1e-6);
    let e = v.eval(-1.5, -1.4, 0.5).unwrap();
    assert_eq!(e.region, Region::CMinus);
    assert_abs_diff_eq!(e.value, 2.0 + 0.4 * 0.4, epsilon = 1e-6);
    let e = v.eval(-1.5, -0.5, 0.5).unwrap();
    assert_eq!(e.region, Region::D);
    assert_abs_diff_eq!(e.value, 2.0, epsilon = 1e-12);
}

#[test]
fn gaussian_value_at_origin() {
    let e = gaussian().eval(0.0, 0.0, 0.0).unwrap();
    assert!(e.gap < 1e-5);
    // 129-node reference; 257 nodes give 0.58170629.
    assert_abs_diff_eq!(e.value, 0.58172985, epsilon = 1e-6);
}

#[test]
fn natural_scale_free_boundary_residuals() {
    let samples: Vec<(f64, f64, f64)> = (0..6)
        .flat_map(|k| {
            let i = -1.5 + 0.2 * k as f64;
            [(i, i + 0.2, i + 1.5), (i, i + 1.3, i + 1.5), (i, i, i + 0.4), (i, i + 0.4, i + 0.4)]
        })
        .collect();
    let r = freeboundary_residuals(natural(), &samples, 1e-4).unwrap();
    assert!(r.eq312.count > 0);
    for name in ["eq312", "eq313", "eq314", "eq317", "eq318"] {
        let res = r.get(name).unwrap();
        assert!(res.max < 1e-3, "{name}: {res:?}");
    }
}

// Lattice values at 100 and 200 steps on [-2, 2]; the plain lattice has
// a first-order bias, Richardson removes most of it.
#[test]
fn lattice_oracle_brackets_the_value() {
    let cost = CostFunction::constant(1.0).unwrap();
    let dp = TrinomialDp::new(Interval::new(-2.0, 2.0).unwrap(), 100).unwrap();
    let ex = dp.extrapolated_value(&cost, 0.0, 0.0, 0.0).unwrap();
    assert_abs_diff_eq!(ex.coarse, 0.6970, epsilon = 5e-4);
    assert_abs_diff_eq!(ex.fine, 0.7163, epsilon = 5e-4);
    assert!(ex.coarse < ex.fine && ex.fine < 0.75);
    assert_abs_diff_eq!(ex.extrapolated, natural().value(0.0, 0.0, 0.0).unwrap(), epsilon = 2e-2);
}

#[test]
fn rejects_unordered_state() {
    assert!(natural().value(0.5, 0.0, 1.0).is_err());
    assert!(natural().value(0.0, 1.0, 0.5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn value_dominates_stopping(i in -1.5f64..1.0, w in 0.0f64..1.5, u in 0.0f64..=1.0) {
        let s = i + w;
        let x = i * (1.0 - u) + s * u;
        let e = natural().eval(i, x, s).unwrap();
        prop_assert!(e.value >= s - i - 1e-9);
        if e.region == Region::D {
            prop_assert!((e.value - (s - i)).abs() <= 1e-12);
        }
    }

    #[test]
    fn natural_scale_is_translation_invariant(i in -1.0f64..0.5, w in 0.0f64..1.0, u in 0.0f64..=1.0, a in -0.5f64..0.5) {
        let s = i + w;
        let x = i * (1.0 - u) + s * u;
        let v0 = natural().value(i, x, s).unwrap();
        let v1 = natural().value(i + a, x + a, s + a).unwrap();
        prop_assert!((v0 - v1).abs() <= 1e-5, "{v0} vs {v1}");
    }

}

proptest! {
    // Each evaluation on the transformed model runs adaptive quadrature.
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn gaussian_is_reflection_symmetric(i in -0.6f64..0.3, w in 0.0f64..0.5, u in 0.0f64..=1.0) {
        let s = i + w;
        let x = i * (1.0 - u) + s * u;
        let v0 = gaussian().value(i, x, s).unwrap();
        let v1 = gaussian().value(-s, -x, -i).unwrap();
        prop_assert!((v0 - v1).abs() <= 1e-5, "{v0} vs {v1}");
    }
}
