//! Stopping rules evaluated on `(I, X, S)` in the transformed coordinates.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::surface::SurfacePair;

#[derive(Clone)]
pub enum StoppingRule {
    /// `τ ≡ 0`.
    Immediate,
    /// Stop once `f*(I, S) <= X <= g*(I, S)`.
    Extremal(Arc<SurfacePair>),
    /// Stop once `S - I >= r`.
    RangeThreshold(f64),
    /// Stop once the level `F⁻¹(q)` of the observed process has been
    /// reached, i.e. once `2q - 1` lies in `[I, S]`.
    QuantileHit(f64),
}

impl StoppingRule {
    pub fn extremal(surfaces: SurfacePair) -> Self {
        StoppingRule::Extremal(Arc::new(surfaces))
    }

    pub fn range_threshold(r: f64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("range threshold must be >= 0, got {r}")));
        }
        Ok(StoppingRule::RangeThreshold(r))
    }

    pub fn quantile_hit(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidArgument(format!("quantile must lie in (0, 1), got {q}")));
        }
        Ok(StoppingRule::QuantileHit(q))
    }

    pub fn description(&self) -> String {
        match self {
            StoppingRule::Immediate => "immediate".into(),
            StoppingRule::Extremal(p) => format!("extremal({})", p.model.name()),
            StoppingRule::RangeThreshold(r) => format!("range_threshold({r})"),
            StoppingRule::QuantileHit(q) => format!("quantile_hit({q})"),
        }
    }
}

impl std::fmt::Debug for StoppingRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.description())
    }
}

/// Per-path evaluator; surface values are cached until the extrema move.
pub(crate) struct RuleState<'a> {
    rule: &'a StoppingRule,
    key: (f64, f64),
    bounds: (f64, f64),
    /// `(I, S)` left the solved grid at some point.
    pub left_grid: bool,
}

impl<'a> RuleState<'a> {
    pub fn new(rule: &'a StoppingRule) -> Self {
        Self {
            rule,
            key: (f64::NAN, f64::NAN),
            bounds: (f64::NAN, f64::NAN),
            left_grid: false,
        }
    }

    pub fn needs_x(&self) -> bool {
        matches!(self.rule, StoppingRule::Extremal(_))
    }

    /// Surfaces at `(i, s)`, clamped into the solved grid. Outside the grid
    /// the rule is only an approximation; such paths are flagged.
    pub fn bounds(&mut self, i: f64, s: f64) -> (f64, f64) {
        if let StoppingRule::Extremal(p) = self.rule {
            if (i, s) != self.key {
                let (lo, hi) = (p.grid.lo(), p.grid.hi());
                let (ic, sc) = (i.clamp(lo, hi), s.clamp(lo, hi));
                self.left_grid |= ic != i || sc != s;
                self.bounds = (p.f_at(ic, sc), p.g_at(ic, sc));
                self.key = (i, s);
            }
        }
        self.bounds
    }

    pub fn should_stop(&mut self, i: f64, x: f64, s: f64) -> bool {
        match *self.rule {
            StoppingRule::Immediate => true,
            StoppingRule::RangeThreshold(r) => s - i >= r,
            StoppingRule::QuantileHit(q) => {
                let level = 2.0 * q - 1.0;
                i <= level && level <= s
            }
            StoppingRule::Extremal(_) => {
                let (f, g) = self.bounds(i, s);
                f <= x && x <= g
            }
        }
    }
}
