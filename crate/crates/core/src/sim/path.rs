//! Per-step building blocks shared by the simulators.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::sim::Scheme;

/// Independent stream for path `index` under `seed`.
pub(crate) fn path_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub(crate) fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Uniform on the open interval `(0, 1)`.
pub(crate) fn uniform_interior<R: Rng>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Probability that a bridge from `a` to `b` with variance `var` touches
/// `level`, both endpoints being on the same side of it.
pub(crate) fn bridge_crossing_probability(a: f64, b: f64, var: f64, level: f64) -> f64 {
    if (a - level) * (b - level) <= 0.0 {
        return 1.0;
    }
    (-2.0 * (a - level) * (b - level) / var).exp()
}

/// Uniform on `(0, 1]`.
fn uniform_open<R: Rng>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

// Below this log-probability a bridge excursion past the running extreme
// is treated as impossible and not sampled.
const LOG_P_SKIP: f64 = -40.0;

/// Running maximum after a step from `a` to `b`, with the within-step
/// maximum drawn from the Brownian bridge of variance `var`.
pub(crate) fn bridge_max<R: Rng>(rng: &mut R, a: f64, b: f64, var: f64, current: f64) -> f64 {
    let top = a.max(b);
    if current > top && -2.0 * (current - a) * (current - b) / var < LOG_P_SKIP {
        return current;
    }
    let d = b - a;
    let m = 0.5 * (a + b + (d * d - 2.0 * var * uniform_open(rng).ln()).sqrt());
    current.max(m).max(top)
}

/// Running minimum, mirror of [`bridge_max`].
pub(crate) fn bridge_min<R: Rng>(rng: &mut R, a: f64, b: f64, var: f64, current: f64) -> f64 {
    -bridge_max(rng, -a, -b, var, -current)
}

/// One step of the configured scheme for `dZ = a dt + b dW`; `db` is `b'`
/// (used by Milstein only).
#[inline]
pub(crate) fn advance(scheme: Scheme, z: f64, a: f64, b: f64, db: f64, dt: f64, xi: f64) -> f64 {
    let dw = dt.sqrt() * xi;
    match scheme {
        Scheme::EulerMaruyama => z + a * dt + b * dw,
        Scheme::Milstein => z + a * dt + b * dw + 0.5 * b * db * (dw * dw - dt),
    }
}

pub(crate) fn central_derivative<F: Fn(f64) -> f64>(f: F, z: f64) -> f64 {
    let h = 1e-6 * (1.0 + z.abs());
    (f(z + h) - f(z - h)) / (2.0 * h)
}
