//! Standard normal density, distribution and quantile.

use libm::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub fn pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

pub fn cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Upper tail `1 - cdf(z)` without cancellation.
pub fn sf(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

pub fn quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let mut z = if p < 0.5 { -tail_guess(p) } else { tail_guess(1.0 - p) };
    for _ in 0..2 {
        z = polish(z, p);
    }
    z
}

// Rational approximation (Acklam), relative error ~1e-9; returns z > 0
// with upper tail q for q <= 0.5.
fn tail_guess(q: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    if q < 0.02425 {
        let t = (-2.0 * q.ln()).sqrt();
        -(((((C[0] * t + C[1]) * t + C[2]) * t + C[3]) * t + C[4]) * t + C[5])
            / ((((D[0] * t + D[1]) * t + D[2]) * t + D[3]) * t + 1.0)
    } else {
        let t = 0.5 - q;
        let r = t * t;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * t
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

// Halley step on the distribution function, evaluated on the tail that
// avoids cancellation.
fn polish(z: f64, p: f64) -> f64 {
    if !z.is_finite() {
        return z;
    }
    let dens = pdf(z);
    if dens <= 0.0 {
        return z;
    }
    let err = if z < 0.0 { cdf(z) - p } else { (1.0 - p) - sf(z) };
    let u = err / dens;
    z - u / (1.0 + 0.5 * z * u)
}

/// Quantile of the upper tail: returns `z` with `sf(z) = q`.
pub fn upper_quantile(q: f64) -> f64 {
    if q <= 0.0 {
        return f64::INFINITY;
    }
    if q >= 1.0 {
        return f64::NEG_INFINITY;
    }
    if q > 0.5 {
        return quantile(1.0 - q);
    }
    let mut z = tail_guess(q);
    for _ in 0..2 {
        let dens = pdf(z);
        if dens <= 0.0 {
            break;
        }
        // Solve sf(z) = q.
        let u = (q - sf(z)) / dens;
        z -= u / (1.0 + 0.5 * z * u);
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for &p in &[1e-12, 1e-6, 0.01, 0.3, 0.5, 0.77, 0.999] {
            let z = quantile(p);
            let back = cdf(z);
            assert!(((back - p) / p).abs() < 1e-13, "p={p} back={back}");
        }
    }

    #[test]
    fn upper_tail_symmetry() {
        let z = upper_quantile(1e-10);
        assert!(((sf(z) - 1e-10) / 1e-10).abs() < 1e-12);
    }

    #[test]
    fn reference_values() {
        assert!((quantile(0.975) - 1.959963984540054).abs() < 1e-14, "{:e}", quantile(0.975) - 1.959963984540054);
        assert!((cdf(1.0) - 0.8413447460685429).abs() < 1e-15);
    }
}
