//! Dynamic program for the range problem on a trinomial walk, used as an
//! independent check of the closed-form value.
//!
//! The walk on the lattice `lo + k h` moves up or down by `h` with
//! probability `p` each over a time step `dt = 2 p h²` (unit variance per
//! unit time, i.e. the natural-scale diffusion). Moves off the lattice are
//! replaced by staying put. Slices of constant `(i, s)` are solved in order
//! of decreasing range, each by policy iteration.

use crate::diffusion::Interval;
use crate::error::{Error, Result};
use crate::surface::CostFunction;

#[derive(Clone, Debug)]
pub struct TrinomialDp {
    pub truncation: Interval,
    /// Number of lattice steps across the truncation.
    pub steps: usize,
    pub p: f64,
}

impl TrinomialDp {
    pub fn new(truncation: Interval, steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(Error::InvalidArgument("lattice needs at least 2 steps".into()));
        }
        Ok(Self {
            truncation,
            steps,
            p: 1.0 / 3.0,
        })
    }

    pub fn h(&self) -> f64 {
        self.truncation.width() / self.steps as f64
    }

    pub fn dt(&self) -> f64 {
        2.0 * self.p * self.h() * self.h()
    }

    pub fn node(&self, k: usize) -> f64 {
        self.truncation.lo + self.h() * k as f64
    }

    /// Values at a lattice state on this lattice, on the lattice with twice
    /// the steps, and their first-order Richardson extrapolation
    /// `2 V(h/2) - V(h)`; the lattice bias is linear in `h`.
    pub fn extrapolated_value(&self, cost: &CostFunction, i: f64, x: f64, s: f64) -> Result<Extrapolated> {
        let coarse = self.solve(cost)?.value(i, x, s)?;
        let fine_lattice = Self {
            steps: 2 * self.steps,
            ..self.clone()
        };
        let fine = fine_lattice.solve(cost)?.value(i, x, s)?;
        Ok(Extrapolated {
            coarse,
            fine,
            extrapolated: 2.0 * fine - coarse,
        })
    }

    pub fn solve(&self, cost: &CostFunction) -> Result<DpSolution> {
        if !(self.p > 0.0 && self.p <= 0.5) {
            return Err(Error::InvalidArgument(format!("move probability {} not in (0, 1/2]", self.p)));
        }
        let n = self.steps;
        let (p, dt) = (self.p, self.dt());
        let mut slices: Vec<Vec<f64>> = vec![Vec::new(); (n + 1) * (n + 1)];
        let mut stop: Vec<Vec<bool>> = vec![Vec::new(); (n + 1) * (n + 1)];
        let idx = |a: usize, b: usize| a * (n + 1) + b;
        for width in (0..=n).rev() {
            for a in 0..=(n - width) {
                let b = a + width;
                let len = width + 1;
                let payoff = self.node(b) - self.node(a);
                let running: Vec<f64> = (a..=b)
                    .map(|k| cost.value(self.node(a), self.node(k), self.node(b)) * dt)
                    .collect();
                // Values entering from the neighbouring slices.
                let below = if a > 0 { Some(slices[idx(a - 1, b)][0]) } else { None };
                let above = if b < n {
                    let sl = &slices[idx(a, b + 1)];
                    Some(sl[sl.len() - 1])
                } else {
                    None
                };
                let (v, policy) = solve_slice(len, p, payoff, &running, below, above)?;
                slices[idx(a, b)] = v;
                stop[idx(a, b)] = policy;
            }
        }
        Ok(DpSolution {
            lattice: self.clone(),
            slices,
            stop,
        })
    }
}

// Policy iteration on one slice. `below`/`above` are the values after a
// move past the lower/upper end; `None` means the move is replaced by
// staying put.
fn solve_slice(
    len: usize,
    p: f64,
    payoff: f64,
    running: &[f64],
    below: Option<f64>,
    above: Option<f64>,
) -> Result<(Vec<f64>, Vec<bool>)> {
    let mut stop = vec![true; len];
    let mut v = vec![payoff; len];
    for _ in 0..(4 * len + 10) {
        // Improve the policy against the current values.
        let mut changed = false;
        for k in 0..len {
            let cont = continuation(&v, k, p, running[k], below, above);
            let want_stop = payoff >= cont;
            if want_stop != stop[k] && (cont - payoff).abs() > 1e-14 {
                stop[k] = want_stop;
                changed = true;
            }
        }
        if !changed {
            return Ok((v, stop));
        }
        v = evaluate_policy(&stop, p, payoff, running, below, above)?;
    }
    Err(Error::NotConverged {
        curve: "trinomial policy iteration".into(),
        residual: f64::NAN,
        sweeps: 4 * len + 10,
    })
}

fn continuation(v: &[f64], k: usize, p: f64, run: f64, below: Option<f64>, above: Option<f64>) -> f64 {
    let len = v.len();
    let up = if k + 1 < len { v[k + 1] } else { above.unwrap_or(v[k]) };
    let down = if k > 0 { v[k - 1] } else { below.unwrap_or(v[k]) };
    -run + p * up + p * down + (1.0 - 2.0 * p) * v[k]
}

// Solves `v = payoff` on stopping nodes and `v = -run + E v` elsewhere with
// the Thomas algorithm.
fn evaluate_policy(
    stop: &[bool],
    p: f64,
    payoff: f64,
    running: &[f64],
    below: Option<f64>,
    above: Option<f64>,
) -> Result<Vec<f64>> {
    let len = stop.len();
    let mut lower = vec![0.0; len];
    let mut diag = vec![0.0; len];
    let mut upper = vec![0.0; len];
    let mut rhs = vec![0.0; len];
    for k in 0..len {
        if stop[k] {
            diag[k] = 1.0;
            rhs[k] = payoff;
            continue;
        }
        diag[k] = 2.0 * p;
        rhs[k] = -running[k];
        if k + 1 < len {
            upper[k] = -p;
        } else if let Some(a) = above {
            rhs[k] += p * a;
        } else {
            diag[k] -= p;
        }
        if k > 0 {
            lower[k] = -p;
        } else if let Some(b) = below {
            rhs[k] += p * b;
        } else {
            diag[k] -= p;
        }
    }
    for k in 1..len {
        let w = lower[k] / diag[k - 1];
        diag[k] -= w * upper[k - 1];
        rhs[k] -= w * rhs[k - 1];
    }
    let mut v = vec![0.0; len];
    for k in (0..len).rev() {
        let next = if k + 1 < len { upper[k] * v[k + 1] } else { 0.0 };
        v[k] = (rhs[k] - next) / diag[k];
        if !v[k].is_finite() {
            return Err(Error::SingularDenominator { t: k as f64, y: diag[k] });
        }
    }
    Ok(v)
}

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct Extrapolated {
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
}

pub struct DpSolution {
    pub lattice: TrinomialDp,
    slices: Vec<Vec<f64>>,
    stop: Vec<Vec<bool>>,
}

impl DpSolution {
    fn lattice_index(&self, v: f64) -> Result<usize> {
        let t = &self.lattice;
        let k = ((v - t.truncation.lo) / t.h()).round();
        if !(k >= 0.0 && k <= t.steps as f64) || ((t.node(k as usize) - v).abs() > 1e-9 * t.h()) {
            return Err(Error::InvalidArgument(format!("{v} is not a lattice point")));
        }
        Ok(k as usize)
    }

    fn locate(&self, i: f64, x: f64, s: f64) -> Result<(usize, usize, usize)> {
        let (a, k, b) = (self.lattice_index(i)?, self.lattice_index(x)?, self.lattice_index(s)?);
        if !(a <= k && k <= b) {
            return Err(Error::InvalidArgument(format!("({i}, {x}, {s}) violates i <= x <= s")));
        }
        Ok((a, k, b))
    }

    /// Value at a lattice state.
    pub fn value(&self, i: f64, x: f64, s: f64) -> Result<f64> {
        let (a, k, b) = self.locate(i, x, s)?;
        Ok(self.slices[a * (self.lattice.steps + 1) + b][k - a])
    }

    /// Whether the optimal lattice policy stops at a lattice state.
    pub fn stops(&self, i: f64, x: f64, s: f64) -> Result<bool> {
        let (a, k, b) = self.locate(i, x, s)?;
        Ok(self.stop[a * (self.lattice.steps + 1) + b][k - a])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stopping_everywhere_is_optimal_for_huge_cost() {
        let dp = TrinomialDp::new(Interval::new(-1.0, 1.0).unwrap(), 20).unwrap();
        let sol = dp.solve(&CostFunction::constant(1e6).unwrap()).unwrap();
        assert_eq!(sol.value(-0.5, 0.0, 0.5).unwrap(), 1.0);
        assert!(sol.stops(0.0, 0.0, 0.0).unwrap());
    }

    #[test]
    fn value_dominates_payoff() {
        let dp = TrinomialDp::new(Interval::new(-1.0, 1.0).unwrap(), 20).unwrap();
        let sol = dp.solve(&CostFunction::constant(1.0).unwrap()).unwrap();
        for a in 0..=20 {
            for b in a..=20 {
                for k in a..=b {
                    let (i, x, s) = (dp.node(a), dp.node(k), dp.node(b));
                    assert!(sol.value(i, x, s).unwrap() >= s - i - 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_off_lattice_states() {
        let dp = TrinomialDp::new(Interval::new(-1.0, 1.0).unwrap(), 4).unwrap();
        let sol = dp.solve(&CostFunction::constant(1.0).unwrap()).unwrap();
        assert!(sol.value(0.1, 0.1, 0.1).is_err());
    }
}
