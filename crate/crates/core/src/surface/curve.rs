//! Integration of a curve `t ↦ y(t)` that starts on the diagonal `y = t`
//! where its slope `num/den` is infinite.
//!
//! Near the diagonal the inverse equation `dt/dy = den/num` is integrated in
//! `y`; once the direct slope drops below a threshold the direct equation
//! is integrated in `t`, stepping exactly onto the requested nodes. Both
//! `f` (in `(i, f)`) and the mirrored `g` (in `(-s, -g)`) use this.

use crate::error::{Error, Result};
use crate::numerics::ode::{Dp45, OdeOptions};

#[derive(Clone, Copy, Debug)]
pub struct CurveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Switch from the inverse to the direct equation when the slope falls
    /// below this value.
    pub to_direct: f64,
    /// Switch back to the inverse equation when the slope exceeds this.
    pub to_inverse: f64,
    pub h_max: f64,
}

impl Default for CurveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-11,
            to_direct: 10.0,
            to_inverse: 1e3,
            h_max: 0.05,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CurveOutput {
    /// `y` at each node (`NaN` for nodes below the start).
    pub values: Vec<f64>,
    /// Direct slope `dy/dt` at each node.
    pub slopes: Vec<f64>,
    /// First node index from which the curve was clipped at the ceiling.
    pub clipped_from: Option<usize>,
    /// The slope became negative somewhere along the curve.
    pub negative_slope: bool,
    pub steps: usize,
}

enum Phase {
    Inverse,
    Direct,
}

/// Solves from `(t_start, t_start)` and reports `y` at `nodes` (ascending).
/// `parts(t, y)` returns `(num, den)` or non-finite values where undefined.
/// The curve is clipped at `ceiling` if it gets there.
pub fn solve_from_diagonal<P>(
    parts: P,
    t_start: f64,
    nodes: &[f64],
    ceiling: f64,
    opts: CurveOptions,
) -> Result<CurveOutput>
where
    P: Fn(f64, f64) -> (f64, f64),
{
    let n = nodes.len();
    let mut out = CurveOutput {
        values: vec![f64::NAN; n],
        slopes: vec![f64::NAN; n],
        ..Default::default()
    };
    let mut idx = nodes.partition_point(|&t| t < t_start);
    if idx < n && nodes[idx] == t_start {
        out.values[idx] = t_start;
        out.slopes[idx] = f64::INFINITY;
        idx += 1;
    }
    if idx >= n {
        return Ok(out);
    }
    if !(ceiling > t_start) {
        return Err(Error::InvalidArgument(format!(
            "ceiling {ceiling} must lie above the start {t_start}"
        )));
    }
    let span = nodes[n - 1] - t_start;
    let slope = |t: f64, y: f64| {
        let (num, den) = parts(t, y);
        num / den
    };
    let ode = |h_init: f64| OdeOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        h_init,
        h_min: 1e-15 * (1.0 + t_start.abs()),
        h_max: opts.h_max,
        max_steps: 2_000_000,
    };
    // Inverse stepping needs an upper limit for y even without a ceiling.
    let y_limit = if ceiling.is_finite() {
        ceiling
    } else {
        t_start + 1e3 * (1.0 + span)
    };
    let near_ceiling = |y: f64| ceiling.is_finite() && ceiling - y <= 1e-9 * (1.0 + ceiling.abs());

    // Both phases integrate the gap `w = y - t` so that the relative
    // tolerance applies to the gap rather than to the absolute position.
    let (mut t, mut y) = (t_start, t_start);
    let mut phase = Phase::Inverse;
    let mut h_init = 1e-6 * (1.0 + span);
    'outer: while idx < n {
        match phase {
            Phase::Inverse => {
                // dw/dy = 1 - den/num, independent variable y.
                let inv = |yy: f64, w: f64| {
                    let (num, den) = parts(yy - w, yy);
                    if !(num > 0.0) {
                        return f64::NAN;
                    }
                    1.0 - den / num
                };
                let mut st = match Dp45::new(inv, y, y - t, true, ode(h_init)) {
                    Ok(st) => st,
                    Err(_) => {
                        phase = Phase::Direct;
                        continue;
                    }
                };
                loop {
                    let step = match st.advance(y_limit) {
                        Ok(step) => step,
                        Err(Error::StepFailure { .. }) if near_ceiling(st.t()) => {
                            out.steps += st.steps();
                            clip(&mut out, idx, ceiling);
                            return Ok(out);
                        }
                        Err(Error::StepFailure { .. }) => {
                            // Inverse equation broke down (slope no longer
                            // positive); continue with the direct one.
                            y = st.t();
                            t = y - st.y();
                            out.steps += st.steps();
                            phase = Phase::Direct;
                            continue 'outer;
                        }
                        Err(e) => return Err(e),
                    };
                    // Here step.t* is y and step.y* is the gap.
                    let t_end = step.t1 - step.y1;
                    while idx < n && nodes[idx] <= t_end {
                        let target = nodes[idx];
                        let yy = invert_step(&step, target);
                        out.values[idx] = yy;
                        out.slopes[idx] = slope(target, yy);
                        idx += 1;
                    }
                    y = step.t1;
                    t = t_end;
                    h_init = step.t1 - step.t0;
                    if idx >= n {
                        out.steps += st.steps();
                        break 'outer;
                    }
                    if step.t1 >= y_limit || near_ceiling(step.t1) {
                        out.steps += st.steps();
                        if ceiling.is_finite() {
                            clip(&mut out, idx, ceiling);
                            return Ok(out);
                        }
                        return Err(Error::StepFailure { at: t, step: 0.0 });
                    }
                    let s = slope(t, y);
                    if s.is_finite() && s < opts.to_direct {
                        out.steps += st.steps();
                        phase = Phase::Direct;
                        continue 'outer;
                    }
                }
            }
            Phase::Direct => {
                // dw/dt = num/den - 1, independent variable t.
                let dir = |tt: f64, w: f64| slope(tt, tt + w) - 1.0;
                let mut st = Dp45::new(dir, t, y - t, true, ode(h_init.max(1e-8)))?;
                while idx < n {
                    let target = nodes[idx];
                    let step = match st.advance(target) {
                        Ok(step) => step,
                        Err(Error::StepFailure { .. }) if near_ceiling(st.t() + st.y()) => {
                            out.steps += st.steps();
                            clip(&mut out, idx, ceiling);
                            return Ok(out);
                        }
                        Err(e) => return Err(e),
                    };
                    let d1 = step.d1 + 1.0;
                    if d1 < 0.0 {
                        out.negative_slope = true;
                    }
                    let y1 = step.t1 + step.y1;
                    if y1 >= ceiling || near_ceiling(y1) {
                        out.steps += st.steps();
                        clip(&mut out, idx, ceiling);
                        return Ok(out);
                    }
                    t = step.t1;
                    y = y1;
                    h_init = step.t1 - step.t0;
                    if step.t1 == target {
                        out.values[idx] = y1;
                        out.slopes[idx] = d1;
                        idx += 1;
                    }
                    if d1 > opts.to_inverse && idx < n {
                        out.steps += st.steps();
                        h_init = h_init / d1.max(1.0);
                        phase = Phase::Inverse;
                        continue 'outer;
                    }
                }
                out.steps += st.steps();
            }
        }
    }
    Ok(out)
}

fn clip(out: &mut CurveOutput, from: usize, ceiling: f64) {
    for k in from..out.values.len() {
        out.values[k] = ceiling;
        out.slopes[k] = 0.0;
    }
    out.clipped_from = Some(from);
}

// Solves `y - w(y) = target` on an inverse step (increasing in y).
fn invert_step(step: &crate::numerics::ode::Step, target: f64) -> f64 {
    let pos = |y: f64| y - step.eval(y) - target;
    let (mut lo, mut hi) = (step.t0, step.t1);
    let (mut flo, mut fhi) = (step.t0 - step.y0 - target, step.t1 - step.y1 - target);
    if flo >= 0.0 {
        return lo;
    }
    if fhi <= 0.0 {
        return hi;
    }
    for _ in 0..200 {
        // Regula falsi step followed by a bisection step.
        let mut m = lo - flo * (hi - lo) / (fhi - flo);
        if !(m > lo && m < hi) {
            m = 0.5 * (lo + hi);
        }
        let fm = pos(m);
        if fm == 0.0 {
            return m;
        }
        if fm < 0.0 {
            lo = m;
            flo = fm;
        } else {
            hi = m;
            fhi = fm;
        }
        let mid = 0.5 * (lo + hi);
        let fmid = pos(mid);
        if fmid < 0.0 {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
            fhi = fmid;
        }
        if hi - lo <= 2.0 * f64::EPSILON * (1.0 + lo.abs()) {
            break;
        }
    }
    if flo.abs() < fhi.abs() {
        lo
    } else {
        hi
    }
}
