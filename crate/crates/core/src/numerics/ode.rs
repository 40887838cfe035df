//! Adaptive Dormand–Prince 5(4) stepper for scalar ODEs with cubic Hermite
//! dense output between accepted steps.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-11,
            h_init: 1e-4,
            h_min: 1e-13,
            h_max: 0.05,
            max_steps: 200_000,
        }
    }
}

/// One accepted step with end values and slopes.
#[derive(Clone, Copy, Debug)]
pub struct Step {
    pub t0: f64,
    pub y0: f64,
    pub d0: f64,
    pub t1: f64,
    pub y1: f64,
    pub d1: f64,
}

impl Step {
    pub fn eval(&self, t: f64) -> f64 {
        super::interp::hermite(self.t0, self.t1, self.y0, self.y1, self.d0, self.d1, t)
    }

    pub fn slope(&self, t: f64) -> f64 {
        super::interp::hermite_slope(self.t0, self.t1, self.y0, self.y1, self.d0, self.d1, t)
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = if self.t0 <= self.t1 {
            (self.t0, self.t1)
        } else {
            (self.t1, self.t0)
        };
        lo <= t && t <= hi
    }
}

/// Stateful stepper; `f(t, y)` may return a non-finite value to signal that
/// the trial point is inadmissible, which forces a smaller step.
pub struct Dp45<F: FnMut(f64, f64) -> f64> {
    f: F,
    t: f64,
    y: f64,
    k1: f64,
    h: f64,
    dir: f64,
    opts: OdeOptions,
    steps: usize,
}

impl<F: FnMut(f64, f64) -> f64> Dp45<F> {
    pub fn new(mut f: F, t0: f64, y0: f64, forward: bool, opts: OdeOptions) -> Result<Self> {
        let k1 = f(t0, y0);
        if !k1.is_finite() {
            return Err(Error::SingularDenominator { t: t0, y: y0 });
        }
        let dir = if forward { 1.0 } else { -1.0 };
        Ok(Self {
            f,
            t: t0,
            y: y0,
            k1,
            h: opts.h_init.min(opts.h_max),
            dir,
            opts,
            steps: 0,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn slope(&self) -> f64 {
        self.k1
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn rhs(&mut self, t: f64, y: f64) -> f64 {
        (self.f)(t, y)
    }

    /// Takes one accepted step, not passing `t_stop`.
    pub fn advance(&mut self, t_stop: f64) -> Result<Step> {
        let remaining = (t_stop - self.t) * self.dir;
        if remaining <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "stepper at t = {} cannot advance to {}",
                self.t, t_stop
            )));
        }
        loop {
            if self.steps >= self.opts.max_steps {
                return Err(Error::StepFailure {
                    at: self.t,
                    step: self.h,
                });
            }
            let mut h = self.h.min(self.opts.h_max);
            let mut last = false;
            if h >= remaining * (1.0 - 1e-12) {
                h = remaining;
                last = true;
            }
            if h < self.opts.h_min && !last {
                return Err(Error::StepFailure {
                    at: self.t,
                    step: h,
                });
            }
            let hs = h * self.dir;
            let (t, y, k1) = (self.t, self.y, self.k1);
            let f = &mut self.f;
            let k2 = f(t + C2 * hs, y + hs * A21 * k1);
            let k3 = f(t + C3 * hs, y + hs * (A31 * k1 + A32 * k2));
            let k4 = f(t + C4 * hs, y + hs * (A41 * k1 + A42 * k2 + A43 * k3));
            let k5 = f(
                t + C5 * hs,
                y + hs * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4),
            );
            let k6 = f(
                t + hs,
                y + hs * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
            );
            let y_new = y + hs * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
            let t_new = if last { t_stop } else { t + hs };
            let k7 = f(t_new, y_new);
            let finite = [k2, k3, k4, k5, k6, k7, y_new]
                .iter()
                .all(|v| v.is_finite());
            if !finite {
                if h <= self.opts.h_min {
                    return Err(Error::StepFailure { at: t, step: h });
                }
                self.h = (0.25 * h).max(self.opts.h_min);
                continue;
            }
            let err = hs * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
            let scale = self.opts.atol + self.opts.rtol * y.abs().max(y_new.abs());
            let ratio = (err / scale).abs();
            if ratio <= 1.0 || h <= self.opts.h_min {
                let factor = if ratio == 0.0 {
                    5.0
                } else {
                    (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
                };
                self.steps += 1;
                self.t = t_new;
                self.y = y_new;
                self.k1 = k7;
                if !last {
                    self.h = (h * factor).min(self.opts.h_max);
                }
                return Ok(Step {
                    t0: t,
                    y0: y,
                    d0: k1,
                    t1: t_new,
                    y1: y_new,
                    d1: k7,
                });
            }
            self.h = h * (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.9);
        }
    }

    /// Overrides the current state, e.g. after clipping onto a constraint.
    pub fn reset(&mut self, t: f64, y: f64) -> Result<()> {
        let k1 = (self.f)(t, y);
        if !k1.is_finite() {
            return Err(Error::SingularDenominator { t, y });
        }
        self.t = t;
        self.y = y;
        self.k1 = k1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let mut s = Dp45::new(|_, y| y, 0.0, 1.0, true, OdeOptions::default()).unwrap();
        while s.t() < 1.0 {
            s.advance(1.0).unwrap();
        }
        assert!((s.y() - std::f64::consts::E).abs() < 1e-8);
    }

    #[test]
    fn backward_integration() {
        let mut s = Dp45::new(|t, _| t.cos(), 2.0, 2f64.sin(), false, OdeOptions::default())
            .unwrap();
        while s.t() > 0.0 {
            s.advance(0.0).unwrap();
        }
        assert!(s.y().abs() < 1e-8);
    }

    #[test]
    fn dense_output_is_accurate() {
        let mut s = Dp45::new(|_, y| -y, 0.0, 1.0, true, OdeOptions::default()).unwrap();
        let step = s.advance(1.0).unwrap();
        let tm = 0.5 * (step.t0 + step.t1);
        assert!((step.eval(tm) - (-tm).exp()).abs() < 1e-9);
    }
}
