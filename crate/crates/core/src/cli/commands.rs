//! The four batch commands. Each writes its artifacts under `out_dir` with
//! the resolved configuration echoed into every file.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cli::config::{parse_rule_name, RunConfig, SimulationMode};
use crate::cli::validate::{run_validation, ValidationReport};
use crate::diffusion::TransformedModel;
use crate::error::{Error, Result};
use crate::sim::{
    simulate_detection, simulate_range_objective, trace_detection_path, trace_range_path, LossReport,
    StoppingRule,
};
use crate::surface::{
    monotonicity_report, ode_residuals, write_surfaces, CurveProvenance, MonotonicityReport, OdeResiduals,
    SurfacePair,
};
use crate::value::{freeboundary_residuals, write_values, FreeBoundaryReport, ValueField, ValueOptions};

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let f = File::create(&path)?;
    Ok((path, BufWriter::new(f)))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let (path, mut w) = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(path)
}

#[derive(Serialize)]
struct Echoed<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

#[derive(Clone, Debug, Serialize)]
pub struct SurfaceSummary {
    pub model: String,
    pub nodes: usize,
    pub f_provenance: Vec<CurveProvenance>,
    pub g_provenance: Vec<CurveProvenance>,
    pub monotonicity: MonotonicityReport,
    pub ode_residuals: OdeResiduals,
}

impl SurfaceSummary {
    pub fn of(p: &SurfacePair) -> Self {
        Self {
            model: p.model.name().to_string(),
            nodes: p.n(),
            f_provenance: p.f_provenance.clone(),
            g_provenance: p.g_provenance.clone(),
            monotonicity: monotonicity_report(p, p.grid.max_step()),
            ode_residuals: ode_residuals(p),
        }
    }
}

/// Solves (or loads) the surfaces and writes `surfaces.csv` and
/// `surfaces.json`.
pub fn cmd_surfaces(cfg: &RunConfig) -> Result<SurfaceSummary> {
    cfg.validate()?;
    let model = cfg.build_model()?;
    let cost = cfg.build_cost()?;
    let p = cfg.surfaces(&model, &cost)?;
    let (_, mut w) = create(&cfg.out_dir, "surfaces.csv")?;
    write_surfaces(&p, &cfg.echo_lines(), &mut w)?;
    w.flush()?;
    let summary = SurfaceSummary::of(&p);
    write_json(
        &cfg.out_dir,
        "surfaces.json",
        &Echoed {
            config: cfg,
            body: &summary,
        },
    )?;
    Ok(summary)
}

/// States `(i, x, s)` with `i < s` on an `n`-point lattice over the middle
/// 60% of the truncation, and `x` at fixed fractions of `[i, s]`.
pub fn sample_states(model: &TransformedModel, n: usize) -> Vec<(f64, f64, f64)> {
    const FRACTIONS: [f64; 7] = [0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0];
    let t = model.truncation();
    let (lo, hi) = (t.lo + 0.2 * t.width(), t.hi - 0.2 * t.width());
    let pts: Vec<f64> = (0..n)
        .map(|k| if n == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
        .collect();
    let mut out = Vec::new();
    for (a, &i) in pts.iter().enumerate() {
        for &s in &pts[a + 1..] {
            out.extend(FRACTIONS.iter().map(|u| (i, i * (1.0 - u) + s * u, s)));
        }
    }
    out
}

fn value_points(cfg: &RunConfig, model: &TransformedModel) -> Vec<(f64, f64, f64)> {
    let mut pts: Vec<(f64, f64, f64)> = cfg.value.points.iter().map(|p| (p[0], p[1], p[2])).collect();
    pts.extend(sample_states(model, cfg.value.residual_samples));
    pts
}

/// Writes `values.csv` (configured points, then the residual sweep) and
/// `value_residuals.json`.
pub fn cmd_value(cfg: &RunConfig) -> Result<FreeBoundaryReport> {
    cfg.validate()?;
    let model = cfg.build_model()?;
    let cost = cfg.build_cost()?;
    let p = cfg.surfaces(&model, &cost)?;
    let field = ValueField::new(&p, ValueOptions::default())?;
    let h = cfg.tolerances.fd_step;
    let tol = cfg.tolerances.residual;
    let (_, mut w) = create(&cfg.out_dir, "values.csv")?;
    write_values(&field, &value_points(cfg, &model), h, tol, &cfg.echo_lines(), &mut w)?;
    w.flush()?;
    let report = freeboundary_residuals(&field, &sample_states(&model, cfg.value.residual_samples), h)?;
    write_json(
        &cfg.out_dir,
        "value_residuals.json",
        &Echoed {
            config: cfg,
            body: &report,
        },
    )?;
    Ok(report)
}

/// Rules from the config, solving surfaces only when a rule needs them.
pub fn resolve_rules(cfg: &RunConfig, model: &TransformedModel) -> Result<Vec<StoppingRule>> {
    let names = cfg
        .simulation
        .rules
        .iter()
        .map(|r| parse_rule_name(r))
        .collect::<Result<Vec<_>>>()?;
    let surfaces = if names.iter().any(|n| n.needs_surfaces()) {
        Some(cfg.surfaces(model, &cfg.build_cost()?)?)
    } else {
        None
    };
    names.into_iter().map(|n| n.resolve(surfaces.as_ref())).collect()
}

#[derive(Serialize)]
struct SimulationOut<'a> {
    reports: &'a [LossReport],
}

/// Runs every configured rule and writes `simulation.json`, plus
/// `trace_<k>.csv` per rule when a trace path is requested.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Vec<LossReport>> {
    cfg.validate()?;
    let model = cfg.build_model()?;
    let rules = resolve_rules(cfg, &model)?;
    let sim = &cfg.simulation;
    let mut reports = Vec::with_capacity(rules.len());
    for (k, rule) in rules.iter().enumerate() {
        let report = match sim.mode {
            SimulationMode::Range => {
                let cost = cfg.build_cost()?;
                let [i, x, s] = sim.start;
                if let Some(idx) = sim.trace_path {
                    let rows = trace_range_path(&model, &cost, (i, x, s), rule, &sim.path, idx)?;
                    write_trace(cfg, k, &rows)?;
                }
                simulate_range_objective(&model, &cost, (i, x, s), rule, &sim.path)?
            }
            SimulationMode::Detection => {
                let (spec, law) = model.components().ok_or_else(|| {
                    Error::Config("detection runs need a transformed model, not natural-scale".into())
                })?;
                let c = cfg.detection_constant()?;
                if let Some(idx) = sim.trace_path {
                    let rows = trace_detection_path(spec, law, c, rule, &sim.path, idx)?;
                    write_trace(cfg, k, &rows)?;
                }
                simulate_detection(spec, law, c, rule, &sim.path)?
            }
        };
        reports.push(report);
    }
    write_json(
        &cfg.out_dir,
        "simulation.json",
        &Echoed {
            config: cfg,
            body: SimulationOut { reports: &reports },
        },
    )?;
    Ok(reports)
}

fn write_trace<T: Serialize>(cfg: &RunConfig, k: usize, rows: &[T]) -> Result<()> {
    let (_, mut w) = create(&cfg.out_dir, &format!("trace_{k}.csv"))?;
    for line in cfg.echo_lines() {
        writeln!(w, "# {line}")?;
    }
    let mut csv = csv::Writer::from_writer(w);
    for r in rows {
        csv.serialize(r)?;
    }
    csv.flush()?;
    Ok(())
}

/// Runs the applicable checks, prints nothing, writes `validation.json`.
pub fn cmd_validate(cfg: &RunConfig) -> Result<ValidationReport> {
    cfg.validate()?;
    let report = run_validation(cfg)?;
    write_json(
        &cfg.out_dir,
        "validation.json",
        &Echoed {
            config: cfg,
            body: &report,
        },
    )?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{Interval, TransformedModel};

    #[test]
    fn samples_are_ordered_states() {
        let m = TransformedModel::natural_scale(Interval::new(-1.0, 1.0).unwrap()).unwrap();
        let pts = sample_states(&m, 4);
        assert!(!pts.is_empty());
        assert!(pts.iter().all(|&(i, x, s)| i <= x && x <= s));
        assert!(pts.iter().all(|&(i, _, s)| i >= -0.6 - 1e-12 && s <= 0.6 + 1e-12));
    }
}
