//! Extremal surfaces `f*` (minimal solution above the lower diagonal) and
//! `g*` (maximal solution below the upper diagonal) as monotone limits of
//! diagonal-start solutions.

use rayon::prelude::*;
use serde::Serialize;

use crate::diffusion::TransformedModel;
use crate::error::{Error, Result};
use crate::numerics::interp::{hermite, lagrange};
use crate::numerics::QuadOptions;
use crate::surface::checks::{monotonicity_report, MonotonicityReport};
use crate::surface::cost::CostFunction;
use crate::surface::curve::{solve_from_diagonal, CurveOptions, CurveOutput};
use crate::surface::grid::TriangleGrid;
use crate::surface::rhs::{f_parts, g_parts};

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Sup-norm change between successive starts that declares convergence.
    pub tol_sup: f64,
    pub curve: CurveOptions,
    pub quad: QuadOptions,
    /// Fail with `MonotonicityViolation` when the assembled surfaces break
    /// the monotonicity invariants.
    pub enforce_monotonicity: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_sup: 1e-6,
            curve: CurveOptions::default(),
            quad: QuadOptions::default(),
            enforce_monotonicity: true,
        }
    }
}

/// Diagonal starts: `lower` decreasing toward the lower edge (for `f`),
/// `upper` increasing toward the upper edge (for `g`).
#[derive(Clone, Debug, Serialize)]
pub struct Schedule {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Schedule {
    /// Geometric approach to the edge. For a transformed model the starts
    /// are `∓1 ± ε 2^(1-n)` with `ε` the truncation margin, kept inside the
    /// model support; for the natural-scale model the truncation is
    /// extended outward by `(w/4)(2^(n-1) - 1)` with `w` its width.
    pub fn geometric(model: &TransformedModel, max_terms: usize) -> Result<Self> {
        if max_terms < 2 {
            return Err(Error::InvalidArgument("schedule needs at least two starts".into()));
        }
        let tr = model.truncation();
        let support = model.support();
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        if model.is_natural_scale() {
            let w = tr.width();
            for n in 1..=max_terms {
                let d = 0.25 * w * (2f64.powi(n as i32 - 1) - 1.0);
                lower.push(tr.lo - d);
                upper.push(tr.hi + d);
            }
        } else {
            let (eps_lo, eps_hi) = (tr.lo + 1.0, 1.0 - tr.hi);
            for n in 1..=max_terms {
                let scale = 2f64.powi(1 - n as i32);
                let (a, b) = (-1.0 + eps_lo * scale, 1.0 - eps_hi * scale);
                if a < support.lo || b > support.hi {
                    break;
                }
                lower.push(a);
                upper.push(b);
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }
}

/// How one slice of a surface was obtained.
#[derive(Clone, Debug, Default, Serialize)]
pub struct CurveProvenance {
    pub starts_used: usize,
    pub last_start: f64,
    pub residual: f64,
    /// Nodes where a later (further out) start fell below an earlier one.
    pub crossings: usize,
    pub negative_slope: bool,
    pub clipped_from: Option<usize>,
    pub steps: usize,
}

/// A curve solved on explicit nodes.
#[derive(Clone, Debug)]
pub struct Curve {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
    pub clipped_from: Option<usize>,
    pub negative_slope: bool,
}

fn f_curve(
    model: &TransformedModel,
    cost: &CostFunction,
    s: f64,
    i_start: f64,
    nodes: &[f64],
    opts: &SolverOptions,
) -> Result<CurveOutput> {
    let quad = opts.quad;
    let parts = |i: f64, f: f64| f_parts(model, cost, i, s, f, quad).unwrap_or((f64::NAN, f64::NAN));
    solve_from_diagonal(parts, i_start, nodes, model.support().hi, opts.curve)
}

fn g_curve(
    model: &TransformedModel,
    cost: &CostFunction,
    i: f64,
    s_start: f64,
    s_nodes_desc: &[f64],
    opts: &SolverOptions,
) -> Result<CurveOutput> {
    let quad = opts.quad;
    let parts = |t: f64, y: f64| g_parts(model, cost, i, -t, -y, quad).unwrap_or((f64::NAN, f64::NAN));
    let t_nodes: Vec<f64> = s_nodes_desc.iter().map(|s| -s).collect();
    let mut out = solve_from_diagonal(parts, -s_start, &t_nodes, -model.support().lo, opts.curve)?;
    for v in out.values.iter_mut() {
        *v = -*v;
    }
    Ok(out)
}

/// `i ↦ f(i, s)` started on the diagonal at `i_start`, reported at `nodes`
/// (ascending, at or above `i_start`).
pub fn solve_f_from_diagonal(
    model: &TransformedModel,
    cost: &CostFunction,
    s: f64,
    i_start: f64,
    nodes: &[f64],
    opts: &SolverOptions,
) -> Result<Curve> {
    check_nodes(nodes)?;
    let out = f_curve(model, cost, s, i_start, nodes, opts)?;
    Ok(Curve {
        nodes: nodes.to_vec(),
        values: out.values,
        slopes: out.slopes,
        clipped_from: out.clipped_from,
        negative_slope: out.negative_slope,
    })
}

/// `s ↦ g(i, s)` started on the diagonal at `s_start` and solved backward
/// in `s`, reported at `nodes` (ascending, at or below `s_start`).
pub fn solve_g_from_diagonal(
    model: &TransformedModel,
    cost: &CostFunction,
    i: f64,
    s_start: f64,
    nodes: &[f64],
    opts: &SolverOptions,
) -> Result<Curve> {
    check_nodes(nodes)?;
    let desc: Vec<f64> = nodes.iter().rev().copied().collect();
    let out = g_curve(model, cost, i, s_start, &desc, opts)?;
    let rev = |v: Vec<f64>| v.into_iter().rev().collect::<Vec<f64>>();
    let n = nodes.len();
    Ok(Curve {
        nodes: nodes.to_vec(),
        values: rev(out.values),
        slopes: rev(out.slopes),
        clipped_from: out.clipped_from.map(|k| n - 1 - k),
        negative_slope: out.negative_slope,
    })
}

fn check_nodes(nodes: &[f64]) -> Result<()> {
    if nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("curve nodes must be strictly increasing".into()));
    }
    Ok(())
}

/// Tabulated extremal surfaces on a triangle grid.
#[derive(Clone, Debug)]
pub struct SurfacePair {
    pub model: TransformedModel,
    pub cost: CostFunction,
    pub grid: TriangleGrid,
    /// `f*` at cell `(k, m)` = `(i_k, s_m)`, row-major by `i`; `NaN` off the triangle.
    pub f: Vec<f64>,
    pub df_di: Vec<f64>,
    pub g: Vec<f64>,
    pub dg_ds: Vec<f64>,
    /// Per `s`-node provenance of `f*(·, s)`.
    pub f_provenance: Vec<CurveProvenance>,
    /// Per `i`-node provenance of `g*(i, ·)`.
    pub g_provenance: Vec<CurveProvenance>,
    pub schedule: Schedule,
    pub options: SolverOptions,
    /// Index into the schedule used for exact re-integration, if known.
    pub exact_start: Option<usize>,
}

struct Slice {
    values: Vec<f64>,
    slopes: Vec<f64>,
    prov: CurveProvenance,
}

// `orient` is +1 where further-out starts lie above (f) and -1 where they
// lie below (g).
fn limit_slice<F>(
    label: &str,
    schedule_len: usize,
    tol: f64,
    orient: f64,
    mut solve: F,
) -> Result<Slice>
where
    F: FnMut(usize) -> Result<CurveOutput>,
{
    let mut prev: Option<CurveOutput> = None;
    let mut crossings = 0;
    let mut steps = 0;
    let mut residual = f64::INFINITY;
    for n in 0..schedule_len {
        let cur = solve(n)?;
        steps += cur.steps;
        if let Some(p) = &prev {
            residual = 0.0;
            for (a, b) in cur.values.iter().zip(&p.values) {
                if a.is_finite() && b.is_finite() {
                    residual = f64::max(residual, (a - b).abs());
                    if orient * (a - b) < -1e-9 * (1.0 + b.abs()) {
                        crossings += 1;
                    }
                } else {
                    residual = f64::INFINITY;
                }
            }
            if residual < tol {
                let prov = CurveProvenance {
                    starts_used: n + 1,
                    last_start: f64::NAN,
                    residual,
                    crossings,
                    negative_slope: cur.negative_slope,
                    clipped_from: cur.clipped_from,
                    steps,
                };
                return Ok(Slice {
                    values: cur.values,
                    slopes: cur.slopes,
                    prov,
                });
            }
        }
        prev = Some(cur);
    }
    Err(Error::NotConverged {
        curve: label.to_string(),
        residual,
        sweeps: schedule_len,
    })
}

/// Computes `f*` and `g*` on every grid cell.
pub fn extremal_surfaces(
    model: &TransformedModel,
    cost: &CostFunction,
    grid: &TriangleGrid,
    schedule: &Schedule,
    opts: &SolverOptions,
) -> Result<SurfacePair> {
    let support = model.support();
    if !(support.contains(grid.lo()) && support.contains(grid.hi())) {
        return Err(Error::InvalidArgument(format!(
            "grid [{}, {}] leaves the model support {support}",
            grid.lo(),
            grid.hi()
        )));
    }
    if schedule.len() < 2 {
        return Err(Error::InvalidArgument("schedule needs at least two starts".into()));
    }
    if schedule.lower[0] > grid.lo() || schedule.upper[0] < grid.hi() {
        return Err(Error::InvalidArgument(
            "first diagonal starts must lie at or beyond the grid edges".into(),
        ));
    }
    let n = grid.len();
    let nodes = grid.nodes();

    let f_slices: Vec<Slice> = (0..n)
        .into_par_iter()
        .map(|m| {
            let s = nodes[m];
            let label = format!("f*(., s = {s})");
            let mut slice = limit_slice(&label, schedule.len(), opts.tol_sup, 1.0, |j| {
                f_curve(model, cost, s, schedule.lower[j], &nodes[..=m], opts)
            })?;
            slice.prov.last_start = schedule.lower[slice.prov.starts_used - 1];
            Ok(slice)
        })
        .collect::<Result<Vec<_>>>()?;

    let g_slices: Vec<Slice> = (0..n)
        .into_par_iter()
        .map(|k| {
            let i = nodes[k];
            let label = format!("g*(i = {i}, .)");
            let desc: Vec<f64> = nodes[k..].iter().rev().copied().collect();
            let mut slice = limit_slice(&label, schedule.len(), opts.tol_sup, -1.0, |j| {
                g_curve(model, cost, i, schedule.upper[j], &desc, opts)
            })?;
            slice.prov.last_start = schedule.upper[slice.prov.starts_used - 1];
            Ok(slice)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut f = vec![f64::NAN; n * n];
    let mut df_di = vec![f64::NAN; n * n];
    let mut g = vec![f64::NAN; n * n];
    let mut dg_ds = vec![f64::NAN; n * n];
    for (m, sl) in f_slices.iter().enumerate() {
        for k in 0..=m {
            f[grid.index(k, m)] = sl.values[k];
            df_di[grid.index(k, m)] = sl.slopes[k];
        }
    }
    for (k, sl) in g_slices.iter().enumerate() {
        // Slice values run from s = hi down to s = node(k).
        for (j, m) in (k..n).rev().enumerate() {
            g[grid.index(k, m)] = sl.values[j];
            dg_ds[grid.index(k, m)] = sl.slopes[j];
        }
    }
    let exact_start = f_slices
        .iter()
        .chain(&g_slices)
        .map(|s| s.prov.starts_used - 1)
        .max();
    let pair = SurfacePair {
        model: model.clone(),
        cost: cost.clone(),
        grid: grid.clone(),
        f,
        df_di,
        g,
        dg_ds,
        f_provenance: f_slices.into_iter().map(|s| s.prov).collect(),
        g_provenance: g_slices.into_iter().map(|s| s.prov).collect(),
        schedule: schedule.clone(),
        options: *opts,
        exact_start,
    };
    if opts.enforce_monotonicity {
        let report = pair.monotonicity();
        if let Some(msg) = report.first_violation() {
            return Err(Error::MonotonicityViolation(msg));
        }
    }
    Ok(pair)
}

impl SurfacePair {
    pub fn n(&self) -> usize {
        self.grid.len()
    }

    pub fn f_node(&self, k: usize, m: usize) -> f64 {
        self.f[self.grid.index(k, m)]
    }

    pub fn g_node(&self, k: usize, m: usize) -> f64 {
        self.g[self.grid.index(k, m)]
    }

    pub fn monotonicity(&self) -> MonotonicityReport {
        monotonicity_report(self, 10.0 * self.options.tol_sup)
    }

    /// `f*(·, s_m)` at `i` by Hermite interpolation with the ODE slopes.
    fn f_along_i(&self, m: usize, i: f64) -> f64 {
        let nodes = self.grid.nodes();
        if m == 0 {
            return self.f_node(0, 0);
        }
        let k = self.grid.locate(i).min(m - 1);
        let (a, b) = (self.grid.index(k, m), self.grid.index(k + 1, m));
        hermite(nodes[k], nodes[k + 1], self.f[a], self.f[b], self.df_di[a], self.df_di[b], i)
    }

    /// `g*(i_k, ·)` at `s` by Hermite interpolation with the ODE slopes.
    fn g_along_s(&self, k: usize, s: f64) -> f64 {
        let nodes = self.grid.nodes();
        let n = self.n();
        if k == n - 1 {
            return self.g_node(k, k);
        }
        let m = self.grid.locate(s).max(k);
        let (a, b) = (self.grid.index(k, m), self.grid.index(k, m + 1));
        hermite(nodes[m], nodes[m + 1], self.g[a], self.g[b], self.dg_ds[a], self.dg_ds[b], s)
    }

    /// Interpolated `f*(i, s)`; slices with `s_m < i` are skipped.
    pub fn f_at(&self, i: f64, s: f64) -> f64 {
        let nodes = self.grid.nodes();
        let n = self.n();
        let m0 = self.grid.locate(s);
        if nodes[m0] == s && nodes[m0] >= i {
            return self.f_along_i(m0, i);
        }
        let lo = m0.saturating_sub(1);
        let mut xs = Vec::with_capacity(4);
        let mut ys = Vec::with_capacity(4);
        let mut m = lo;
        while xs.len() < 4 && m < n {
            if nodes[m] >= i {
                xs.push(nodes[m]);
                ys.push(self.f_along_i(m, i));
            }
            m += 1;
        }
        lagrange(&xs, &ys, s)
    }

    /// Interpolated `g*(i, s)`; slices with `i_k > s` are skipped.
    pub fn g_at(&self, i: f64, s: f64) -> f64 {
        let nodes = self.grid.nodes();
        let k0 = self.grid.locate(i);
        if nodes[k0] == i && nodes[k0] <= s {
            return self.g_along_s(k0, s);
        }
        let hi = (k0 + 2).min(self.n() - 1);
        let mut xs = Vec::with_capacity(4);
        let mut ys = Vec::with_capacity(4);
        let mut k = hi as isize;
        while xs.len() < 4 && k >= 0 {
            let ku = k as usize;
            if nodes[ku] <= s {
                xs.push(nodes[ku]);
                ys.push(self.g_along_s(ku, s));
            }
            k -= 1;
        }
        lagrange(&xs, &ys, i)
    }

    /// `f*(i, s)` by integrating from the converged diagonal start, for
    /// off-grid points where interpolation is not accurate enough.
    pub fn f_exact(&self, i: f64, s: f64) -> Result<f64> {
        match self.exact_start {
            Some(j) => {
                let start = self.schedule.lower[j];
                let out = f_curve(&self.model, &self.cost, s, start, &[i], &self.options)?;
                Ok(out.values[0])
            }
            None => Ok(self.f_at(i, s)),
        }
    }

    /// `g*(i, s)` by integrating from the converged diagonal start.
    pub fn g_exact(&self, i: f64, s: f64) -> Result<f64> {
        match self.exact_start {
            Some(j) => {
                let start = self.schedule.upper[j];
                let out = g_curve(&self.model, &self.cost, i, start, &[s], &self.options)?;
                Ok(out.values[0])
            }
            None => Ok(self.g_at(i, s)),
        }
    }

    /// Whether `(i, s)` lies in `C⁰`, i.e. `f*(i, s) > g*(i, s)`.
    pub fn in_c0(&self, i: f64, s: f64) -> bool {
        self.f_at(i, s) > self.g_at(i, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::Interval;

    #[test]
    fn natural_schedule_extends_outward() {
        let m = TransformedModel::natural_scale(Interval::new(-3.0, 3.0).unwrap()).unwrap();
        let s = Schedule::geometric(&m, 5).unwrap();
        assert_eq!(s.lower, vec![-3.0, -4.5, -7.5, -13.5, -25.5]);
        assert_eq!(s.upper[1], 4.5);
    }

    #[test]
    fn small_grid_example_two() {
        let m = TransformedModel::natural_scale(Interval::new(-1.0, 1.0).unwrap()).unwrap();
        let c = CostFunction::constant(1.0).unwrap();
        let grid = TriangleGrid::uniform(m.truncation(), 17).unwrap();
        let sched = Schedule::geometric(&m, 12).unwrap();
        let p = extremal_surfaces(&m, &c, &grid, &sched, &SolverOptions::default()).unwrap();
        for (k, mm) in grid.cells() {
            let (i, s) = (grid.node(k), grid.node(mm));
            assert!((p.f_node(k, mm) - (i + 0.5)).abs() < 1e-5);
            assert!((p.g_node(k, mm) - (s - 0.5)).abs() < 1e-5);
        }
        assert!((p.f_at(0.03, 0.41) - 0.53).abs() < 1e-5);
        assert!((p.g_at(-0.33, 0.71) - 0.21).abs() < 1e-5);
        assert!((p.f_exact(0.03, 0.41).unwrap() - 0.53).abs() < 1e-6);
    }
}
