use approx::assert_relative_eq;
use htd_core::diffusion::{
    expected_additive_functional, green_function, hitting_probabilities, preset, Interval, TransformedModel,
};
use htd_core::numerics::normal;
use htd_core::numerics::QuadOptions;
use proptest::prelude::*;

fn gaussian() -> TransformedModel {
    preset("bm-gaussian", 1e-3, 1.0).unwrap()
}

fn natural() -> TransformedModel {
    TransformedModel::natural_scale(Interval::new(-3.0, 3.0).unwrap()).unwrap()
}

#[test]
fn natural_scale_exit_time_from_the_centre() {
    let e = expected_additive_functional(&natural(), -1.0, 1.0, 0.0, |_| 1.0, QuadOptions::default()).unwrap();
    assert_relative_eq!(e, 1.0, epsilon = 1e-8);
}

// Brownian exit time from (za, zb) is (z - za)(zb - z); the transformed
// model has to reproduce it through its own scale and speed.
#[test]
fn gaussian_exit_time_matches_brownian_formula() {
    let m = gaussian();
    for (a, x, b) in [(-0.5, 0.0, 0.5), (-0.8, -0.3, 0.6), (-0.2, 0.1, 0.9)] {
        let (za, z, zb) = (m.level_of_x(a), m.level_of_x(x), m.level_of_x(b));
        let e = expected_additive_functional(&m, a, b, x, |_| 1.0, QuadOptions::default()).unwrap();
        assert_relative_eq!(e, (z - za) * (zb - z), max_relative = 1e-7);
    }
}

#[test]
fn gaussian_coefficients_follow_ito() {
    let m = gaussian();
    for x in [-0.9, -0.5, 0.0, 0.3, 0.8] {
        let z = normal::quantile(0.5 * (x + 1.0));
        let phi = normal::pdf(z);
        assert_relative_eq!(m.sigma(x), 2.0 * phi, max_relative = 1e-8);
        assert_relative_eq!(m.mu(x), -z * phi, epsilon = 1e-8);
    }
}

#[test]
fn rejects_interval_outside_support() {
    assert!(hitting_probabilities(&gaussian(), -1.5, 0.0, 0.5).is_err());
    assert!(hitting_probabilities(&natural(), 0.5, 0.0, 1.0).is_err());
}

proptest! {
    #[test]
    fn hitting_probabilities_sum_to_one(a in -0.95f64..0.0, u in 0.01f64..0.99, b in 0.05f64..0.95) {
        let m = gaussian();
        let x = a + u * (b - a);
        let (pl, pu) = hitting_probabilities(&m, a, x, b).unwrap();
        prop_assert!((pl + pu - 1.0).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&pl) && (0.0..=1.0).contains(&pu));
        // Brownian motion: P(exit at the top) = (z - za) / (zb - za).
        let (za, z, zb) = (m.level_of_x(a), m.level_of_x(x), m.level_of_x(b));
        prop_assert!((pu - (z - za) / (zb - za)).abs() <= 1e-8);
    }

    #[test]
    fn green_function_is_symmetric(a in -0.9f64..-0.1, b in 0.1f64..0.9, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let m = gaussian();
        let (x, y) = (a + u * (b - a), a + v * (b - a));
        let gxy = green_function(&m, a, b, x, y).unwrap();
        let gyx = green_function(&m, a, b, y, x).unwrap();
        prop_assert!((gxy - gyx).abs() <= 1e-10);
        prop_assert!(gxy >= -1e-14);
        prop_assert!(green_function(&m, a, b, x, a).unwrap().abs() <= 1e-10);
        prop_assert!(green_function(&m, a, b, x, b).unwrap().abs() <= 1e-10);
    }

    #[test]
    fn level_map_round_trips(z in -3.0f64..3.0) {
        let m = gaussian();
        prop_assert!((m.level_of_x(m.x_of_level(z)) - z).abs() <= 1e-7);
    }

    #[test]
    fn scale_is_increasing(x in -0.99f64..0.98, dx in 1e-3f64..0.01) {
        let m = gaussian();
        prop_assert!(m.scale(x + dx) > m.scale(x));
    }
}
