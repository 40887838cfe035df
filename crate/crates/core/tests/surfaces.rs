use std::sync::OnceLock;

use approx::assert_abs_diff_eq;
use htd_core::diffusion::{preset, Interval, TransformedModel};
use htd_core::surface::{
    boundary_maps, extremal_surfaces, load_surfaces, monotonicity_report, save_surfaces, CostFunction, Schedule,
    SolverOptions, SurfacePair, TriangleGrid,
};
use proptest::prelude::*;

fn solve(model: &TransformedModel, cost: &CostFunction, nodes: usize) -> SurfacePair {
    let grid = TriangleGrid::uniform(model.truncation(), nodes).unwrap();
    let schedule = Schedule::geometric(model, 30).unwrap();
    extremal_surfaces(model, cost, &grid, &schedule, &SolverOptions::default()).unwrap()
}

fn natural(c: f64) -> SurfacePair {
    let m = TransformedModel::natural_scale(Interval::new(-3.0, 3.0).unwrap()).unwrap();
    solve(&m, &CostFunction::constant(c).unwrap(), 65)
}

fn gaussian() -> &'static SurfacePair {
    static P: OnceLock<SurfacePair> = OnceLock::new();
    P.get_or_init(|| {
        let m = preset("bm-gaussian", 1e-3, 1.0).unwrap();
        solve(&m, &CostFunction::proportional_range(1.0).unwrap(), 129)
    })
}

#[test]
fn natural_scale_surfaces_are_offset_diagonals() {
    for c in [1.0, 2.0] {
        let p = natural(c);
        for (i, s) in [(-1.0, 0.0), (-0.5, 1.5), (0.25, 0.75), (-2.0, 2.0)] {
            assert_abs_diff_eq!(p.f_at(i, s), i + 0.5 / c, epsilon = 1e-9);
            assert_abs_diff_eq!(p.g_at(i, s), s - 0.5 / c, epsilon = 1e-9);
        }
    }
}

#[test]
fn natural_scale_boundary_maps() {
    let p = natural(1.0);
    let (i_of_s, s_of_i) = boundary_maps(&p, 0.0, 0.0).unwrap();
    assert_abs_diff_eq!(i_of_s, -1.0, epsilon = 1e-9);
    assert_abs_diff_eq!(s_of_i, 1.0, epsilon = 1e-9);
}

#[test]
fn gaussian_surfaces_are_monotone() {
    let p = gaussian();
    let r = monotonicity_report(p, p.grid.max_step());
    assert!(r.is_ok(), "{:?}", r.first_violation());
}

// Reference values from a 129-node solve, frozen as a regression guard.
#[test]
fn gaussian_boundary_maps_are_symmetric() {
    let (i_of_s, s_of_i) = boundary_maps(gaussian(), 0.0, 0.0).unwrap();
    assert_abs_diff_eq!(i_of_s, -s_of_i, epsilon = 1e-6);
    assert_abs_diff_eq!(s_of_i, 0.60602, epsilon = 5e-4);
}

#[test]
fn coarse_grid_still_monotone() {
    let m = preset("bm-gaussian", 1e-3, 1.0).unwrap();
    let p = solve(&m, &CostFunction::proportional_range(1.0).unwrap(), 17);
    assert!(monotonicity_report(&p, p.grid.max_step()).is_ok());
}

#[test]
fn save_and_load_round_trip() {
    let p = natural(1.0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("surfaces.csv");
    save_surfaces(&p, &["model = natural-scale".to_string()], &path).unwrap();
    let q = load_surfaces(&path, &p.model, &p.cost, SolverOptions::default()).unwrap();
    assert_eq!(q.n(), p.n());
    for (k, m) in p.grid.cells() {
        assert_eq!(q.f_node(k, m).to_bits(), p.f_node(k, m).to_bits());
        assert_eq!(q.g_node(k, m).to_bits(), p.g_node(k, m).to_bits());
    }
}

#[test]
fn rejects_grid_outside_support() {
    let m = preset("bm-gaussian", 1e-3, 1.0).unwrap();
    let grid = TriangleGrid::uniform(Interval::new(-1.5, 1.5).unwrap(), 17).unwrap();
    let e = extremal_surfaces(
        &m,
        &CostFunction::proportional_range(1.0).unwrap(),
        &grid,
        &Schedule::geometric(&m, 30).unwrap(),
        &SolverOptions::default(),
    );
    assert!(e.is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // The gaussian model is symmetric under x -> -x, which swaps the roles
    // of f* and g*: f*(i, s) = -g*(-s, -i).
    #[test]
    fn gaussian_reflection_symmetry(i in -0.9f64..0.9, w in 0.0f64..0.9) {
        let p = gaussian();
        let s = (i + w).min(0.99);
        prop_assert!((p.f_at(i, s) + p.g_at(-s, -i)).abs() <= 1e-6);
    }

    #[test]
    fn f_increases_in_i(i in -0.9f64..0.3, d in 0.02f64..0.3, w in 0.0f64..0.3) {
        let p = gaussian();
        let s = i + d + w;
        prop_assert!(p.f_at(i + d, s) > p.f_at(i, s));
        prop_assert!(p.g_at(i + d, s) <= p.g_at(i, s) + 1e-12);
    }

    #[test]
    fn surfaces_stay_off_the_diagonals(i in -0.95f64..0.9, w in 0.0f64..1.0) {
        let p = gaussian();
        let s = (i + w).min(0.99);
        prop_assert!(p.f_at(i, s) > i);
        prop_assert!(p.g_at(i, s) < s);
    }
}
