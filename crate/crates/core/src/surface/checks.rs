//! Post-hoc checks on assembled surfaces.

use serde::Serialize;

use crate::surface::extremal::SurfacePair;
use crate::surface::rhs::{f_parts, g_parts};

/// Counts of violated monotonicity and diagonal invariants, with the first
/// offending cell of each kind.
#[derive(Clone, Debug, Default, Serialize)]
pub struct MonotonicityReport {
    pub slack: f64,
    pub f_increasing_in_i: Violations,
    pub f_decreasing_in_s: Violations,
    pub g_increasing_in_s: Violations,
    pub g_decreasing_in_i: Violations,
    pub f_above_diagonal: Violations,
    pub g_below_diagonal: Violations,
    /// Crossings between curves of successive diagonal starts.
    pub crossings: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Violations {
    pub count: usize,
    pub first: Option<(f64, f64)>,
    pub worst: f64,
}

impl Violations {
    fn record(&mut self, i: f64, s: f64, amount: f64) {
        self.count += 1;
        if self.first.is_none() {
            self.first = Some((i, s));
        }
        self.worst = self.worst.max(amount);
    }
}

impl MonotonicityReport {
    pub fn total(&self) -> usize {
        self.f_increasing_in_i.count
            + self.f_decreasing_in_s.count
            + self.g_increasing_in_s.count
            + self.g_decreasing_in_i.count
            + self.f_above_diagonal.count
            + self.g_below_diagonal.count
            + self.crossings
    }

    pub fn is_ok(&self) -> bool {
        self.total() == 0
    }

    pub fn first_violation(&self) -> Option<String> {
        let named = [
            ("f* not increasing in i", &self.f_increasing_in_i),
            ("f* not decreasing in s", &self.f_decreasing_in_s),
            ("g* not increasing in s", &self.g_increasing_in_s),
            ("g* not decreasing in i", &self.g_decreasing_in_i),
            ("f* not above the lower diagonal", &self.f_above_diagonal),
            ("g* not below the upper diagonal", &self.g_below_diagonal),
        ];
        for (name, v) in named {
            if let Some((i, s)) = v.first {
                return Some(format!(
                    "{name} at (i, s) = ({i}, {s}); {} cells, worst by {:e}",
                    v.count, v.worst
                ));
            }
        }
        if self.crossings > 0 {
            return Some(format!("{} crossings between diagonal-start curves", self.crossings));
        }
        None
    }
}

/// Strict increase is required along the ODE direction (`f*` in `i`, `g*`
/// in `s`); the other two monotonicities are weak, allowing `slack`.
/// Cells clipped at the support edge are exempt from strictness.
pub fn monotonicity_report(p: &SurfacePair, slack: f64) -> MonotonicityReport {
    let n = p.n();
    let nodes = p.grid.nodes();
    let mut r = MonotonicityReport {
        slack,
        ..Default::default()
    };
    let ceiling = p.model.support().hi;
    let floor = p.model.support().lo;
    for m in 0..n {
        for k in 0..=m {
            let (i, s) = (nodes[k], nodes[m]);
            let f = p.f_node(k, m);
            let g = p.g_node(k, m);
            if !(f > i) {
                r.f_above_diagonal.record(i, s, i - f);
            }
            if !(g < s) {
                r.g_below_diagonal.record(i, s, g - s);
            }
            if k < m {
                let f_next = p.f_node(k + 1, m);
                if !(f_next > f) && f_next < ceiling {
                    r.f_increasing_in_i.record(i, s, f - f_next);
                }
                let g_next = p.g_node(k + 1, m);
                if !(g_next <= g + slack) {
                    r.g_decreasing_in_i.record(i, s, g_next - g);
                }
            }
            if m + 1 < n {
                let f_up = p.f_node(k, m + 1);
                if !(f_up <= f + slack) {
                    r.f_decreasing_in_s.record(i, s, f_up - f);
                }
                let g_up = p.g_node(k, m + 1);
                if !(g_up > g) && g > floor {
                    r.g_increasing_in_s.record(i, s, g - g_up);
                }
            }
        }
    }
    r.crossings = p
        .f_provenance
        .iter()
        .chain(&p.g_provenance)
        .map(|c| c.crossings)
        .sum();
    r
}

/// Largest relative mismatch between the tabulated increment over two
/// cells and Simpson's rule applied to the equation's slopes, over interior
/// cells whose stencil stays off the diagonal and away from clipped cells.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct OdeResiduals {
    pub max_f: f64,
    pub max_g: f64,
    pub tolerance: f64,
}

impl OdeResiduals {
    pub fn is_ok(&self) -> bool {
        self.max_f <= self.tolerance && self.max_g <= self.tolerance
    }
}

/// Residual at one cell for `f*` (in `i`) and `g*` (in `s`); `NaN` where the
/// stencil is unavailable.
pub fn cell_residuals(p: &SurfacePair, k: usize, m: usize) -> (f64, f64) {
    let nodes = p.grid.nodes();
    let n = p.n();
    let quad = p.options.quad;
    let ceiling = p.model.support().hi;
    let floor = p.model.support().lo;
    let slope_f = |k: usize| {
        let (num, den) = f_parts(&p.model, &p.cost, nodes[k], nodes[m], p.f_node(k, m), quad).ok()?;
        Some(num / den)
    };
    let slope_g = |m: usize| {
        let (num, den) = g_parts(&p.model, &p.cost, nodes[k], nodes[m], p.g_node(k, m), quad).ok()?;
        Some(num / den)
    };
    let mut rf = f64::NAN;
    if k >= 1 && k + 2 <= m {
        let next = p.f_node(k + 2, m);
        if next < ceiling {
            let d = [slope_f(k - 1), slope_f(k), slope_f(k + 1)];
            if let [Some(a), Some(b), Some(c)] = d {
                let inc = p.f_node(k + 1, m) - p.f_node(k - 1, m);
                rf = simpson_residual(inc, nodes[k + 1] - nodes[k - 1], a, b, c);
            }
        }
    }
    let mut rg = f64::NAN;
    if m >= k + 2 && m + 1 < n {
        let prev = p.g_node(k, m - 2);
        if prev > floor {
            let d = [slope_g(m - 1), slope_g(m), slope_g(m + 1)];
            if let [Some(a), Some(b), Some(c)] = d {
                let inc = p.g_node(k, m + 1) - p.g_node(k, m - 1);
                rg = simpson_residual(inc, nodes[m + 1] - nodes[m - 1], a, b, c);
            }
        }
    }
    (rf, rg)
}

// Assumes a uniform pair of cells; `width` spans both.
fn simpson_residual(increment: f64, width: f64, d0: f64, d1: f64, d2: f64) -> f64 {
    let simpson = width * (d0 + 4.0 * d1 + d2) / 6.0;
    (increment - simpson).abs() / (width * (1.0 + d1.abs()))
}

pub fn ode_residuals(p: &SurfacePair) -> OdeResiduals {
    let h = p.grid.max_step();
    let mut r = OdeResiduals {
        tolerance: f64::max(1e-4, 10.0 * h * h),
        ..Default::default()
    };
    for (k, m) in p.grid.cells() {
        let (rf, rg) = cell_residuals(p, k, m);
        if rf.is_finite() {
            r.max_f = r.max_f.max(rf);
        }
        if rg.is_finite() {
            r.max_g = r.max_g.max(rg);
        }
    }
    r
}
