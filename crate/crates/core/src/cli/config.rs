//! Declarative run configuration (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diffusion::{self, CoefficientTable, Interval, TransformOptions, TransformedModel};
use crate::error::{Error, Result};
use crate::numerics::QuadOptions;
use crate::sim::{PathConfig, StoppingRule};
use crate::surface::{
    extremal_surfaces, load_surfaces, CostFunction, CurveOptions, Schedule, SolverOptions, SurfacePair,
    TriangleGrid,
};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub cost: CostConfig,
    pub grid: GridConfig,
    pub tolerances: Tolerances,
    pub value: ValueConfig,
    pub simulation: SimulationConfig,
    pub out_dir: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// `natural-scale` or `bm-gaussian`; ignored when `table` is set.
    pub preset: String,
    /// CSV with columns `z, a, b, F, F1, F2`.
    pub table: Option<PathBuf>,
    /// Truncation `[-1 + epsilon, 1 - epsilon]` for transformed models.
    pub epsilon: f64,
    /// Truncation `[-half_width, half_width]` for the natural-scale model.
    pub half_width: f64,
    /// Explicit truncation, overriding the two fields above.
    pub truncation: Option<[f64; 2]>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            preset: "natural-scale".into(),
            table: None,
            epsilon: 1e-3,
            // Wide enough that simulated extrema from the origin stay on the grid.
            half_width: 8.0,
            truncation: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CostConfig {
    Constant { c: f64 },
    ProportionalRange { c: f64 },
    /// Tables with columns `u, c, dc`.
    Separable { c1_table: PathBuf, c2_table: PathBuf },
    /// Tensor table with columns `i, x, s, c, dc_di, dc_ds`.
    General { table: PathBuf },
}

impl Default for CostConfig {
    fn default() -> Self {
        CostConfig::Constant { c: 1.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub nodes: usize,
    pub schedule_terms: usize,
    /// Load surfaces from this CSV instead of solving.
    pub surfaces_file: Option<PathBuf>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            nodes: 257,
            schedule_terms: 30,
            surfaces_file: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub tol_sup: f64,
    pub ode_rtol: f64,
    pub ode_atol: f64,
    pub quad_abs: f64,
    pub quad_rel: f64,
    /// Free-boundary residual threshold.
    pub residual: f64,
    /// Finite-difference step of the residual checks.
    pub fd_step: f64,
    /// Sup-norm threshold against closed-form surfaces.
    pub surface: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let curve = CurveOptions::default();
        let quad = QuadOptions::default();
        Self {
            tol_sup: SolverOptions::default().tol_sup,
            ode_rtol: curve.rtol,
            ode_atol: curve.atol,
            quad_abs: quad.abs_tol,
            quad_rel: quad.rel_tol,
            residual: 1e-3,
            fd_step: 1e-4,
            surface: 1e-3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValueConfig {
    /// Points `(i, x, s)` written to the value CSV.
    pub points: Vec<[f64; 3]>,
    /// Samples per axis of the residual sweep over the truncation.
    pub residual_samples: usize,
}

impl Default for ValueConfig {
    fn default() -> Self {
        Self {
            points: vec![[0.0, 0.0, 0.0]],
            residual_samples: 9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimulationMode {
    /// The range problem on `X` from `start`.
    Range,
    /// The observed diffusion with a hidden level.
    Detection,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub mode: SimulationMode,
    /// Rules as `extremal`, `immediate`, `range_threshold(r)`, `quantile_hit(q)`.
    pub rules: Vec<String>,
    pub start: [f64; 3],
    /// Write a step-by-step CSV of this path index for every rule.
    pub trace_path: Option<usize>,
    pub path: PathConfig,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            mode: SimulationMode::Range,
            rules: vec!["extremal".into(), "range_threshold(1)".into()],
            start: [0.0, 0.0, 0.0],
            trace_path: None,
            path: PathConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    /// Config echo as `#`-free lines for output headers.
    pub fn echo_lines(&self) -> Vec<String> {
        let mut lines = vec![format!("htd {}", env!("CARGO_PKG_VERSION"))];
        lines.extend(self.to_toml().lines().filter(|l| !l.is_empty()).map(String::from));
        lines
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        for (name, v) in [
            ("tol_sup", t.tol_sup),
            ("ode_rtol", t.ode_rtol),
            ("ode_atol", t.ode_atol),
            ("quad_abs", t.quad_abs),
            ("quad_rel", t.quad_rel),
            ("residual", t.residual),
            ("fd_step", t.fd_step),
            ("surface", t.surface),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        if self.grid.nodes < 2 {
            return Err(Error::Config(format!(
                "grid needs at least 2 nodes, got {}",
                self.grid.nodes
            )));
        }
        if self.grid.schedule_terms < 2 {
            return Err(Error::Config("schedule_terms must be at least 2".into()));
        }
        for p in self.referenced_files() {
            if !p.exists() {
                return Err(Error::Config(format!("file not found: {}", p.display())));
            }
        }
        if self.model.table.is_none() && !["natural-scale", "bm-gaussian"].contains(&self.model.preset.as_str()) {
            return Err(Error::Config(format!("unknown model preset '{}'", self.model.preset)));
        }
        self.simulation.path.validate()?;
        for r in &self.simulation.rules {
            parse_rule_name(r)?;
        }
        Ok(())
    }

    fn referenced_files(&self) -> Vec<&Path> {
        let mut v: Vec<&Path> = Vec::new();
        if let Some(p) = &self.model.table {
            v.push(p);
        }
        match &self.cost {
            CostConfig::Separable { c1_table, c2_table } => {
                v.push(c1_table);
                v.push(c2_table);
            }
            CostConfig::General { table } => v.push(table),
            _ => {}
        }
        if let Some(p) = &self.grid.surfaces_file {
            v.push(p);
        }
        v
    }

    pub fn build_model(&self) -> Result<TransformedModel> {
        let m = &self.model;
        if let Some(path) = &m.table {
            let table = CoefficientTable::from_csv(path)?;
            let t = match m.truncation {
                Some([lo, hi]) => Interval::new(lo, hi)?,
                None => Interval::new(-1.0 + m.epsilon, 1.0 - m.epsilon)?,
            };
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("table");
            return TransformedModel::transformed_named(
                &table.diffusion_spec(),
                &table.law(),
                t,
                TransformOptions::default(),
                name,
            );
        }
        match (m.preset.as_str(), m.truncation) {
            ("natural-scale", Some([lo, hi])) => TransformedModel::natural_scale(Interval::new(lo, hi)?),
            ("bm-gaussian", Some([lo, hi])) => TransformedModel::transformed_named(
                &diffusion::DiffusionSpec::brownian(),
                &diffusion::HiddenLevelLaw::standard_normal(),
                Interval::new(lo, hi)?,
                TransformOptions::default(),
                "bm-gaussian",
            ),
            (name, _) => diffusion::preset(name, m.epsilon, m.half_width),
        }
    }

    pub fn build_cost(&self) -> Result<CostFunction> {
        match &self.cost {
            CostConfig::Constant { c } => CostFunction::constant(*c),
            CostConfig::ProportionalRange { c } => CostFunction::proportional_range(*c),
            CostConfig::Separable { c1_table, c2_table } => CostFunction::separable_from_csv(c1_table, c2_table),
            CostConfig::General { table } => CostFunction::general_from_csv(table),
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        let t = &self.tolerances;
        SolverOptions {
            tol_sup: t.tol_sup,
            curve: CurveOptions {
                rtol: t.ode_rtol,
                atol: t.ode_atol,
                ..CurveOptions::default()
            },
            quad: QuadOptions {
                abs_tol: t.quad_abs,
                rel_tol: t.quad_rel,
                ..QuadOptions::default()
            },
            ..SolverOptions::default()
        }
    }

    /// Solves the surfaces, or loads them when `grid.surfaces_file` is set.
    pub fn surfaces(&self, model: &TransformedModel, cost: &CostFunction) -> Result<SurfacePair> {
        let opts = self.solver_options();
        if let Some(path) = &self.grid.surfaces_file {
            if !path.exists() {
                return Err(Error::Config(format!("surfaces file not found: {}", path.display())));
            }
            return load_surfaces(path, model, cost, opts);
        }
        let grid = TriangleGrid::uniform(model.truncation(), self.grid.nodes)?;
        let schedule = Schedule::geometric(model, self.grid.schedule_terms)?;
        extremal_surfaces(model, cost, &grid, &schedule, &opts)
    }

    /// The detection cost constant `c` of a `proportional-range` cost.
    pub fn detection_constant(&self) -> Result<f64> {
        match self.cost {
            CostConfig::ProportionalRange { c } => Ok(c),
            _ => Err(Error::Config(
                "detection runs need cost kind 'proportional-range'".into(),
            )),
        }
    }
}

/// Rule names without their surfaces; `extremal` is resolved later.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RuleName {
    Extremal,
    Immediate,
    RangeThreshold(f64),
    QuantileHit(f64),
}

pub fn parse_rule_name(text: &str) -> Result<RuleName> {
    let t = text.trim();
    let (name, arg) = match t.split_once('(') {
        Some((n, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| Error::Config(format!("rule '{t}': missing ')'")))?;
            let v: f64 = inner
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("rule '{t}': bad number '{inner}'")))?;
            (n.trim(), Some(v))
        }
        None => (t, None),
    };
    let rule = match (name, arg) {
        ("extremal", None) => RuleName::Extremal,
        ("immediate", None) => RuleName::Immediate,
        ("range_threshold", Some(r)) => {
            StoppingRule::range_threshold(r).map_err(|e| Error::Config(e.to_string()))?;
            RuleName::RangeThreshold(r)
        }
        ("quantile_hit", Some(q)) => {
            StoppingRule::quantile_hit(q).map_err(|e| Error::Config(e.to_string()))?;
            RuleName::QuantileHit(q)
        }
        _ => return Err(Error::Config(format!("unknown rule '{t}'"))),
    };
    Ok(rule)
}

impl RuleName {
    pub fn needs_surfaces(self) -> bool {
        self == RuleName::Extremal
    }

    pub fn resolve(self, surfaces: Option<&SurfacePair>) -> Result<StoppingRule> {
        Ok(match self {
            RuleName::Extremal => StoppingRule::extremal(
                surfaces
                    .ok_or_else(|| Error::Config("extremal rule needs surfaces".into()))?
                    .clone(),
            ),
            RuleName::Immediate => StoppingRule::Immediate,
            RuleName::RangeThreshold(r) => StoppingRule::range_threshold(r)?,
            RuleName::QuantileHit(q) => StoppingRule::quantile_hit(q)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let c = RunConfig::default();
        let back = RunConfig::from_toml_str(&c.to_toml()).unwrap();
        assert_eq!(back.to_toml(), c.to_toml());
        assert!(c.validate().is_ok());
    }

    #[test]
    fn partial_config_fills_defaults() {
        let c = RunConfig::from_toml_str(
            r#"
            [model]
            preset = "bm-gaussian"
            [cost]
            kind = "proportional-range"
            c = 2.0
            [simulation.path]
            n_paths = 10
            "#,
        )
        .unwrap();
        assert_eq!(c.grid.nodes, 257);
        assert_eq!(c.simulation.path.n_paths, 10);
        assert_eq!(c.detection_constant().unwrap(), 2.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml_str("[grid]\nnode = 3\n").is_err());
    }

    #[test]
    fn rule_names_parse() {
        assert_eq!(parse_rule_name("extremal").unwrap(), RuleName::Extremal);
        assert_eq!(parse_rule_name(" range_threshold( 0.5 )").unwrap(), RuleName::RangeThreshold(0.5));
        assert_eq!(parse_rule_name("quantile_hit(0.3)").unwrap(), RuleName::QuantileHit(0.3));
        assert!(parse_rule_name("quantile_hit(1.5)").is_err());
        assert!(parse_rule_name("median").is_err());
        assert!(parse_rule_name("range_threshold(x)").is_err());
    }

    #[test]
    fn empty_grid_is_a_config_error() {
        let mut c = RunConfig::default();
        c.grid.nodes = 0;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }
}
