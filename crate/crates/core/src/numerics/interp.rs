//! Piecewise cubic Hermite interpolation, monotone slope limiting and
//! short Lagrange stencils.

/// Cubic Hermite value on `[x0, x1]` given end values and slopes.
pub fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    if h == 0.0 {
        return y0;
    }
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// Derivative of [`hermite`] with respect to `x`.
pub fn hermite_slope(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    if h == 0.0 {
        return d0;
    }
    let t = (x - x0) / h;
    let t2 = t * t;
    let dh00 = (6.0 * t2 - 6.0 * t) / h;
    let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    let dh01 = (-6.0 * t2 + 6.0 * t) / h;
    let dh11 = 3.0 * t2 - 2.0 * t;
    dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1
}

/// Fritsch–Carlson limiting of nodal slopes so the Hermite interpolant stays
/// monotone wherever the data are. Slopes whose sign disagrees with the
/// adjacent secants are zeroed.
pub fn limit_monotone_slopes(x: &[f64], y: &[f64], d: &mut [f64]) {
    let n = x.len();
    for k in 0..n.saturating_sub(1) {
        let h = x[k + 1] - x[k];
        let delta = (y[k + 1] - y[k]) / h;
        if delta == 0.0 {
            d[k] = 0.0;
            d[k + 1] = 0.0;
            continue;
        }
        if d[k] * delta < 0.0 {
            d[k] = 0.0;
        }
        if d[k + 1] * delta < 0.0 {
            d[k + 1] = 0.0;
        }
        let a = d[k] / delta;
        let b = d[k + 1] / delta;
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            d[k] = tau * a * delta;
            d[k + 1] = tau * b * delta;
        }
    }
}

/// Three-point finite-difference slopes on a non-uniform grid.
pub fn finite_difference_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    if n == 2 {
        let s = (y[1] - y[0]) / (x[1] - x[0]);
        return vec![s, s];
    }
    for k in 1..n - 1 {
        let h0 = x[k] - x[k - 1];
        let h1 = x[k + 1] - x[k];
        let s0 = (y[k] - y[k - 1]) / h0;
        let s1 = (y[k + 1] - y[k]) / h1;
        d[k] = (h1 * s0 + h0 * s1) / (h0 + h1);
    }
    let h0 = x[1] - x[0];
    let h1 = x[2] - x[1];
    let s0 = (y[1] - y[0]) / h0;
    let s1 = (y[2] - y[1]) / h1;
    d[0] = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    let m = n - 1;
    let h0 = x[m] - x[m - 1];
    let h1 = x[m - 1] - x[m - 2];
    let s0 = (y[m] - y[m - 1]) / h0;
    let s1 = (y[m - 1] - y[m - 2]) / h1;
    d[m] = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    d
}

/// Index `k` with `x[k] <= t < x[k+1]`, clamped to `[0, n-2]`.
pub fn bracket(x: &[f64], t: f64) -> usize {
    let n = x.len();
    if n < 2 || t <= x[0] {
        return 0;
    }
    if t >= x[n - 1] {
        return n - 2;
    }
    let k = x.partition_point(|&v| v <= t);
    (k - 1).min(n - 2)
}

/// Piecewise cubic Hermite table over arbitrary sorted nodes.
#[derive(Clone, Debug)]
pub struct HermiteTable {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub d: Vec<f64>,
}

impl HermiteTable {
    pub fn new(x: Vec<f64>, y: Vec<f64>, d: Vec<f64>) -> Self {
        debug_assert_eq!(x.len(), y.len());
        debug_assert_eq!(x.len(), d.len());
        Self { x, y, d }
    }

    /// Table with finite-difference slopes, optionally limited for monotone data.
    pub fn from_values(x: Vec<f64>, y: Vec<f64>, monotone: bool) -> Self {
        let mut d = finite_difference_slopes(&x, &y);
        if monotone {
            limit_monotone_slopes(&x, &y, &mut d);
        }
        Self { x, y, d }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn eval(&self, t: f64) -> f64 {
        if self.x.len() == 1 {
            return self.y[0];
        }
        let k = bracket(&self.x, t);
        hermite(
            self.x[k],
            self.x[k + 1],
            self.y[k],
            self.y[k + 1],
            self.d[k],
            self.d[k + 1],
            t,
        )
    }

    pub fn slope(&self, t: f64) -> f64 {
        if self.x.len() == 1 {
            return self.d[0];
        }
        let k = bracket(&self.x, t);
        hermite_slope(
            self.x[k],
            self.x[k + 1],
            self.y[k],
            self.y[k + 1],
            self.d[k],
            self.d[k + 1],
            t,
        )
    }
}

/// Lagrange interpolation through up to a handful of points.
pub fn lagrange(xs: &[f64], ys: &[f64], t: f64) -> f64 {
    let mut acc = 0.0;
    for (j, (&xj, &yj)) in xs.iter().zip(ys).enumerate() {
        let mut w = 1.0;
        for (m, &xm) in xs.iter().enumerate() {
            if m != j {
                w *= (t - xm) / (xj - xm);
            }
        }
        acc += w * yj;
    }
    acc
}

/// Pairwise summation; keeps rounding growth logarithmic in the length.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}
