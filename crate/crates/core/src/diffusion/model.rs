//! The transformed process `X = 2F(Z) - 1` and its scale/speed data.
//!
//! For a general model the drift exponent `J = ∫ 2μ/σ²`, the scale `L`, the
//! speed mass `M0 = ∫ m'` and first moment `M1 = ∫ L m'` are tabulated on
//! nodes uniform in `u = atanh(x)` (all anchored at `x = 0`) and read back by
//! cubic Hermite interpolation in `u` with exact nodal slopes.

use std::fmt;
use std::sync::Arc;

use crate::diffusion::spec::{DiffusionSpec, HiddenLevelLaw, Interval};
use crate::error::{Error, Result};
use crate::numerics::gauss::SpectralPanel;
use crate::numerics::interp::hermite;

/// Options for [`TransformedModel::transformed`].
#[derive(Clone, Copy, Debug)]
pub struct TransformOptions {
    /// Total number of cache nodes across both sides of zero.
    pub cache_nodes: usize,
    /// Distance of the modelled support from ±1. Defaults to the truncation
    /// margin times 2^-24.
    pub support_epsilon: Option<f64>,
}

impl Default for TransformOptions {
    fn default() -> Self {
        Self {
            cache_nodes: 4096,
            support_epsilon: None,
        }
    }
}

#[derive(Clone)]
pub struct TransformedModel {
    inner: Arc<Inner>,
}

struct Inner {
    kind: Kind,
    truncation: Interval,
    support: Interval,
    name: String,
}

enum Kind {
    NaturalScale,
    Transformed(Box<Cache>),
}

struct Cache {
    spec: DiffusionSpec,
    law: HiddenLevelLaw,
    // Nodes u_lo = -n_lo*du_lo < ... < 0 < ... < n_hi*du_hi = u_hi.
    du_lo: f64,
    du_hi: f64,
    n_lo: usize,
    u: Vec<f64>,
    j: Vec<f64>,
    dj: Vec<f64>,
    l: Vec<f64>,
    dl: Vec<f64>,
    m0: Vec<f64>,
    dm0: Vec<f64>,
    m1: Vec<f64>,
    dm1: Vec<f64>,
}

impl fmt::Debug for TransformedModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransformedModel")
            .field("name", &self.inner.name)
            .field("truncation", &self.inner.truncation)
            .field("support", &self.inner.support)
            .finish()
    }
}

/// Pointwise coefficients of the transformed process at level `z`.
#[derive(Clone, Copy, Debug)]
struct Coefficients {
    mu: f64,
    sigma: f64,
}

fn coefficients(spec: &DiffusionSpec, law: &HiddenLevelLaw, z: f64) -> Coefficients {
    let a = spec.drift(z);
    let b = spec.diffusion(z);
    let d1 = law.pdf(z);
    let d2 = law.pdf_derivative(z);
    Coefficients {
        mu: 2.0 * a * d1 + b * b * d2,
        sigma: 2.0 * b * d1,
    }
}

// Level z with 2F(z) - 1 = tanh(u), computed from u without forming 1 - x.
fn level_of_u(law: &HiddenLevelLaw, u: f64) -> f64 {
    if u <= 0.0 {
        law.quantile(1.0 / (1.0 + (-2.0 * u).exp()))
    } else {
        law.upper_quantile(1.0 / (1.0 + (2.0 * u).exp()))
    }
}

fn sech2(u: f64) -> f64 {
    let c = u.cosh();
    1.0 / (c * c)
}

fn atanh_ends(x: f64) -> f64 {
    0.5 * ((1.0 + x) / (1.0 - x)).ln()
}

impl TransformedModel {
    /// Process already in natural scale: `μ = 0`, `σ = 1` on the real line.
    pub fn natural_scale(truncation: Interval) -> Result<Self> {
        if !truncation.lo.is_finite() || !truncation.hi.is_finite() {
            return Err(Error::InvalidArgument("truncation must be bounded".into()));
        }
        Ok(Self {
            inner: Arc::new(Inner {
                kind: Kind::NaturalScale,
                truncation,
                support: Interval::real_line(),
                name: "natural-scale".into(),
            }),
        })
    }

    /// Builds `X = 2F(Z) - 1` and its cached scale/speed data.
    pub fn transformed(
        spec: &DiffusionSpec,
        law: &HiddenLevelLaw,
        truncation: Interval,
        opts: TransformOptions,
    ) -> Result<Self> {
        Self::transformed_named(spec, law, truncation, opts, "transformed")
    }

    pub fn transformed_named(
        spec: &DiffusionSpec,
        law: &HiddenLevelLaw,
        truncation: Interval,
        opts: TransformOptions,
        name: &str,
    ) -> Result<Self> {
        if !(truncation.lo > -1.0 && truncation.hi < 1.0 && truncation.lo < 0.0 && truncation.hi > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "truncation {truncation} must lie inside (-1, 1) and contain 0"
            )));
        }
        if opts.cache_nodes < 16 {
            return Err(Error::InvalidArgument("cache_nodes must be at least 16".into()));
        }
        let margin = (truncation.lo + 1.0).min(1.0 - truncation.hi);
        let eps = opts.support_epsilon.unwrap_or(margin * 2f64.powi(-24));
        if !(eps > 0.0 && eps < margin) {
            return Err(Error::InvalidArgument(format!(
                "support epsilon {eps} must be in (0, {margin})"
            )));
        }
        let dom = spec.domain();
        let x_lo_dom = if dom.lo.is_finite() { 2.0 * law.cdf(dom.lo) - 1.0 } else { -1.0 };
        let x_hi_dom = if dom.hi.is_finite() { 2.0 * law.cdf(dom.hi) - 1.0 } else { 1.0 };
        if x_lo_dom > truncation.lo || x_hi_dom < truncation.hi {
            return Err(Error::InvalidArgument(format!(
                "F maps the diffusion domain {dom} onto [{x_lo_dom}, {x_hi_dom}], \
                 which does not cover the truncation {truncation}"
            )));
        }
        let u_lo = if x_lo_dom > -1.0 + eps {
            x_lo_dom.atanh()
        } else {
            -atanh_ends(1.0 - eps)
        };
        let u_hi = if x_hi_dom < 1.0 - eps {
            x_hi_dom.atanh()
        } else {
            atanh_ends(1.0 - eps)
        };
        let support = Interval::new(u_lo.tanh(), u_hi.tanh())?;

        let span = u_hi - u_lo;
        let n_lo = ((opts.cache_nodes as f64 * (-u_lo) / span).round() as usize).max(4);
        let n_hi = (opts.cache_nodes.saturating_sub(n_lo)).max(4);
        let du_lo = -u_lo / n_lo as f64;
        let du_hi = u_hi / n_hi as f64;
        let mut u = Vec::with_capacity(n_lo + n_hi + 1);
        for k in 0..n_lo {
            u.push(-((n_lo - k) as f64) * du_lo);
        }
        u.push(0.0);
        for k in 1..=n_hi {
            u.push(k as f64 * du_hi);
        }
        u[0] = u_lo;
        let last = u.len() - 1;
        u[last] = u_hi;

        let n = u.len();
        let mut cache = Cache {
            spec: spec.clone(),
            law: law.clone(),
            du_lo,
            du_hi,
            n_lo,
            u,
            j: vec![0.0; n],
            dj: vec![0.0; n],
            l: vec![0.0; n],
            dl: vec![0.0; n],
            m0: vec![0.0; n],
            dm0: vec![0.0; n],
            m1: vec![0.0; n],
            dm1: vec![0.0; n],
        };

        // Nodal J' in u, sigma positivity.
        let mut sig2 = vec![0.0; n];
        for k in 0..n {
            let uk = cache.u[k];
            let z = level_of_u(law, uk);
            let c = coefficients(spec, law, z);
            let x = uk.tanh();
            if !(c.sigma > 0.0) || !c.sigma.is_finite() || !c.mu.is_finite() {
                return Err(Error::NonPositiveSigma { x, value: c.sigma });
            }
            sig2[k] = c.sigma * c.sigma;
            cache.dj[k] = 2.0 * c.mu / sig2[k] * sech2(uk);
        }

        let panel = SpectralPanel::new(12);
        let np = panel.len();
        let mut jv = vec![0.0; np];
        let mut jc = vec![0.0; np];
        let mut lv = vec![0.0; np];
        let mut lc = vec![0.0; np];
        let mut mv = vec![0.0; np];
        let mut mc = vec![0.0; np];
        let mut m1v = vec![0.0; np];
        // Integrate one panel from `k_from` (known) to `k_to` (adjacent).
        let mut step = |c: &mut Cache, k_from: usize, k_to: usize| -> Result<()> {
            let (a, b) = (c.u[k_from], c.u[k_to]);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            let forward = b > a;
            let mut coeffs = Vec::with_capacity(np);
            for q in 0..np {
                let uq = mid + half * panel.nodes[q];
                let z = level_of_u(&c.law, uq);
                let co = coefficients(&c.spec, &c.law, z);
                if !(co.sigma > 0.0) || !co.sigma.is_finite() {
                    return Err(Error::NonPositiveSigma { x: uq.tanh(), value: co.sigma });
                }
                coeffs.push((uq, co));
                jv[q] = 2.0 * co.mu / (co.sigma * co.sigma) * sech2(uq);
            }
            // Cumulative integrals measured from the known end.
            let signed = |panel: &SpectralPanel, v: &[f64], out: &mut [f64]| -> f64 {
                panel.integrate_to_nodes(v, out);
                let total = panel.integrate_all(v);
                for o in out.iter_mut() {
                    *o *= half;
                    if !forward {
                        *o -= total * half;
                    }
                }
                total * half * if forward { 1.0 } else { -1.0 }
            };
            let dj_total = signed(&panel, &jv, &mut jc);
            for q in 0..np {
                let jq = c.j[k_from] + jc[q];
                let (uq, co) = coeffs[q];
                let s2 = sech2(uq);
                lv[q] = (-jq).exp() * s2;
                mv[q] = 2.0 * jq.exp() / (co.sigma * co.sigma) * s2;
            }
            let dl_total = signed(&panel, &lv, &mut lc);
            let dm0_total = signed(&panel, &mv, &mut mc);
            for q in 0..np {
                m1v[q] = (c.l[k_from] + lc[q]) * mv[q];
            }
            let dm1_total = signed(&panel, &m1v, &mut mc);
            c.j[k_to] = c.j[k_from] + dj_total;
            c.l[k_to] = c.l[k_from] + dl_total;
            c.m0[k_to] = c.m0[k_from] + dm0_total;
            c.m1[k_to] = c.m1[k_from] + dm1_total;
            Ok(())
        };
        let k0 = cache.n_lo;
        for k in k0..n - 1 {
            step(&mut cache, k, k + 1)?;
        }
        for k in (1..=k0).rev() {
            step(&mut cache, k, k - 1)?;
        }
        for k in 0..n {
            let s2 = sech2(cache.u[k]);
            cache.dl[k] = (-cache.j[k]).exp() * s2;
            cache.dm0[k] = 2.0 * cache.j[k].exp() / sig2[k] * s2;
            cache.dm1[k] = cache.l[k] * cache.dm0[k];
        }
        let bad = [&cache.j, &cache.l, &cache.m0, &cache.m1]
            .iter()
            .any(|v| v.iter().any(|x| !x.is_finite()));
        if bad {
            return Err(Error::InvalidArgument(
                "scale or speed data overflowed on the support; reduce the support".into(),
            ));
        }
        Ok(Self {
            inner: Arc::new(Inner {
                kind: Kind::Transformed(Box::new(cache)),
                truncation,
                support,
                name: name.to_string(),
            }),
        })
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    pub fn is_natural_scale(&self) -> bool {
        matches!(self.inner.kind, Kind::NaturalScale)
    }

    /// Interval on which surfaces are solved and values reported.
    pub fn truncation(&self) -> Interval {
        self.inner.truncation
    }

    /// Interval on which the model functions are defined (wider than the
    /// truncation for transformed models).
    pub fn support(&self) -> Interval {
        self.inner.support
    }

    /// State space of `X`: `(-1, 1)` for transformed models.
    pub fn state_space(&self) -> Interval {
        match self.inner.kind {
            Kind::NaturalScale => Interval::real_line(),
            Kind::Transformed(_) => Interval { lo: -1.0, hi: 1.0 },
        }
    }

    /// Underlying diffusion and hidden-level law, if any.
    pub fn components(&self) -> Option<(&DiffusionSpec, &HiddenLevelLaw)> {
        match &self.inner.kind {
            Kind::NaturalScale => None,
            Kind::Transformed(c) => Some((&c.spec, &c.law)),
        }
    }

    /// Maps a level `z` to `x = 2F(z) - 1`.
    pub fn x_of_level(&self, z: f64) -> f64 {
        match &self.inner.kind {
            Kind::NaturalScale => z,
            Kind::Transformed(c) => 2.0 * c.law.cdf(z) - 1.0,
        }
    }

    /// Maps `x` back to the level `z = F^{-1}((x + 1)/2)`.
    pub fn level_of_x(&self, x: f64) -> f64 {
        match &self.inner.kind {
            Kind::NaturalScale => x,
            Kind::Transformed(c) => c.law.level_of_x(x),
        }
    }

    pub fn mu(&self, x: f64) -> f64 {
        match &self.inner.kind {
            Kind::NaturalScale => 0.0,
            Kind::Transformed(c) => {
                if !self.in_support(x) {
                    return f64::NAN;
                }
                coefficients(&c.spec, &c.law, c.law.level_of_x(x)).mu
            }
        }
    }

    pub fn sigma(&self, x: f64) -> f64 {
        match &self.inner.kind {
            Kind::NaturalScale => 1.0,
            Kind::Transformed(c) => {
                if !self.in_support(x) {
                    return f64::NAN;
                }
                coefficients(&c.spec, &c.law, c.law.level_of_x(x)).sigma
            }
        }
    }

    fn in_support(&self, x: f64) -> bool {
        self.inner.support.contains(x)
    }

    /// `J(x) = ∫_0^x 2μ/σ²`.
    pub fn drift_exponent(&self, x: f64) -> f64 {
        match &self.inner.kind {
            Kind::NaturalScale => 0.0,
            Kind::Transformed(c) => c.interp(x, &c.j, &c.dj),
        }
    }

    /// Scale function `L(x) = ∫_0^x exp(-J)`.
    pub fn scale(&self, x: f64) -> f64 {
        match &self.inner.kind {
            Kind::NaturalScale => x,
            Kind::Transformed(c) => c.interp(x, &c.l, &c.dl),
        }
    }

    pub fn scale_derivative(&self, x: f64) -> f64 {
        match &self.inner.kind {
            Kind::NaturalScale => 1.0,
            Kind::Transformed(_) => {
                if !self.in_support(x) {
                    return f64::NAN;
                }
                (-self.drift_exponent(x)).exp()
            }
        }
    }

    /// Speed density `m'(x) = 2 / (σ²(x) L'(x))`.
    pub fn speed_density(&self, x: f64) -> f64 {
        match &self.inner.kind {
            Kind::NaturalScale => 2.0,
            Kind::Transformed(_) => {
                let s = self.sigma(x);
                2.0 * self.drift_exponent(x).exp() / (s * s)
            }
        }
    }

    /// `(σ²/2) L'` at `x`, i.e. `1 / m'(x)`.
    pub fn generator_weight(&self, x: f64) -> f64 {
        match &self.inner.kind {
            Kind::NaturalScale => 0.5,
            Kind::Transformed(_) => {
                let s = self.sigma(x);
                0.5 * s * s * (-self.drift_exponent(x)).exp()
            }
        }
    }

    /// Speed mass `M0(x) = ∫_0^x m'`.
    pub fn speed_mass(&self, x: f64) -> f64 {
        match &self.inner.kind {
            Kind::NaturalScale => 2.0 * x,
            Kind::Transformed(c) => c.interp(x, &c.m0, &c.dm0),
        }
    }

    /// First scale moment of the speed measure, `M1(x) = ∫_0^x L m'`.
    pub fn speed_moment(&self, x: f64) -> f64 {
        match &self.inner.kind {
            Kind::NaturalScale => x * x,
            Kind::Transformed(c) => c.interp(x, &c.m1, &c.dm1),
        }
    }

    /// `H(x) = ∫_0^x (L(x) - L(y)) m'(y) dy`, the particular solution of
    /// `(σ²/2) H'' + μ H' = 1` with `H(0) = H'(0) = 0`.
    pub fn h(&self, x: f64) -> f64 {
        match &self.inner.kind {
            Kind::NaturalScale => x * x,
            Kind::Transformed(_) => self.scale(x) * self.speed_mass(x) - self.speed_moment(x),
        }
    }

    /// `∫_a^b (L(y) - L(a)) m'(y) dy` from the cached moments.
    pub fn k_lower(&self, a: f64, b: f64) -> f64 {
        let la = self.scale(a);
        (self.speed_moment(b) - self.speed_moment(a)) - la * (self.speed_mass(b) - self.speed_mass(a))
    }

    /// `∫_a^b (L(b) - L(y)) m'(y) dy` from the cached moments.
    pub fn k_upper(&self, a: f64, b: f64) -> f64 {
        let lb = self.scale(b);
        lb * (self.speed_mass(b) - self.speed_mass(a)) - (self.speed_moment(b) - self.speed_moment(a))
    }
}

impl Cache {
    fn interp(&self, x: f64, y: &[f64], d: &[f64]) -> f64 {
        if !(x > -1.0 && x < 1.0) {
            return f64::NAN;
        }
        let u = x.atanh();
        let n = self.u.len();
        if u < self.u[0] || u > self.u[n - 1] {
            return f64::NAN;
        }
        let k = if u < 0.0 {
            let k = ((u - self.u[0]) / self.du_lo).floor() as isize;
            k.clamp(0, self.n_lo as isize - 1) as usize
        } else {
            let k = self.n_lo + (u / self.du_hi).floor() as usize;
            k.min(n - 2)
        };
        hermite(self.u[k], self.u[k + 1], y[k], y[k + 1], d[k], d[k + 1], u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::normal;

    fn gaussian() -> TransformedModel {
        TransformedModel::transformed(
            &DiffusionSpec::brownian(),
            &HiddenLevelLaw::standard_normal(),
            Interval::new(-1.0 + 1e-6, 1.0 - 1e-6).unwrap(),
            TransformOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn gaussian_scale_has_closed_form() {
        let m = gaussian();
        let c = (2.0 / std::f64::consts::PI).sqrt();
        for &x in &[-0.999, -0.7, -0.2, 0.0, 0.13, 0.5, 0.9, 0.99999] {
            let q = normal::quantile(0.5 * (x + 1.0));
            assert!((m.scale(x) - c * q).abs() < 1e-10, "x={x} {} {}", m.scale(x), c * q);
            assert!((m.drift_exponent(x) + 0.5 * q * q).abs() < 1e-10, "x={x}");
            let lp = (0.5 * q * q).exp();
            assert!(((m.scale_derivative(x) - lp) / lp).abs() < 1e-10);
        }
        assert!((m.sigma(0.0) - c).abs() < 1e-14);
        let w = (-0.5f64 * 0.25).exp() / std::f64::consts::PI;
        let x = 2.0 * normal::cdf(0.5) - 1.0;
        assert!((m.generator_weight(x) - w).abs() < 1e-12);
    }

    #[test]
    fn gaussian_speed_moments_match_quadrature() {
        let m = gaussian();
        for &x in &[-0.9, -0.3, 0.4, 0.95] {
            let m0 = crate::numerics::integrate(|y| m.speed_density(y), 0.0, x, Default::default())
                .unwrap()
                .value;
            let m1 = crate::numerics::integrate(
                |y| m.scale(y) * m.speed_density(y),
                0.0,
                x,
                Default::default(),
            )
            .unwrap()
            .value;
            assert!((m.speed_mass(x) - m0).abs() < 1e-9 * (1.0 + m0.abs()));
            assert!((m.speed_moment(x) - m1).abs() < 1e-9 * (1.0 + m1.abs()));
        }
    }

    #[test]
    fn natural_scale_identities() {
        let m = TransformedModel::natural_scale(Interval::new(-3.0, 3.0).unwrap()).unwrap();
        assert_eq!(m.scale(1.5), 1.5);
        assert_eq!(m.h(-2.0), 4.0);
        assert_eq!(m.k_lower(-1.0, 1.0), 4.0);
        assert_eq!(m.k_upper(-1.0, 1.0), 4.0);
    }

    #[test]
    fn outside_support_is_nan() {
        let m = gaussian();
        assert!(m.scale(1.0).is_nan());
        assert!(m.sigma(-1.5).is_nan());
    }

    #[test]
    fn truncation_outside_unit_interval_rejected() {
        let r = TransformedModel::transformed(
            &DiffusionSpec::brownian(),
            &HiddenLevelLaw::standard_normal(),
            Interval::new(-1.5, 0.5).unwrap(),
            TransformOptions::default(),
        );
        assert!(r.is_err());
    }
}
