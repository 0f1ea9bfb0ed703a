//! Absolutely continuous weights on the unit circle and their trigonometric
//! moments.
//!
//! A weight is a density `w(e^{iθ})` with respect to the normalized arc-length
//! measure `dm = dθ / 2π`. Moments follow the convention
//! `c_j = ∫ conj(ξ)^j w(ξ) dm(ξ)`, so the Toeplitz matrix `T[j][k] = c_{j-k}`
//! and the Poisson weight with parameter λ has `c_j = λ^j`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad::{AdaptiveQuad, GaussLegendre};

/// Default relative tolerance per moment.
pub const DEFAULT_MOMENT_TOL: f64 = 1e-12;

/// Rule applied on every moment panel and on each of its halves.
const MOMENT_RULE_ORDER: usize = 8;

/// Nodes handled per parallel work item in the moment sum.
const NODE_CHUNK: usize = 2048;

/// Recompute `e^{-ijθ}` from scratch this often instead of rotating.
const RESYNC_EVERY: usize = 64;

pub type WeightFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Maps any angle onto [-π, π].
pub fn wrap_angle(theta: f64) -> f64 {
    if (-PI..=PI).contains(&theta) {
        return theta;
    }
    let t = theta - 2.0 * PI * (theta / (2.0 * PI)).round();
    t.clamp(-PI, PI)
}

/// Piecewise-linear weight through `(θ, w)` samples, periodic across ±π.
///
/// This is an approximation of whatever density produced the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWeight {
    theta: Vec<f64>,
    values: Vec<f64>,
}

impl SampledWeight {
    pub fn new(mut samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidParameter(
                "sampled weight needs at least two samples".into(),
            ));
        }
        for &(t, w) in &samples {
            if !t.is_finite() || !(-PI..=PI).contains(&t) {
                return Err(Error::InvalidParameter(format!(
                    "sample angle {t} outside [-pi, pi]"
                )));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "sample value {w} at angle {t} is not positive"
                )));
            }
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        samples.dedup_by(|a, b| a.0 == b.0);
        let (theta, values) = samples.into_iter().unzip();
        Ok(Self { theta, values })
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let t = wrap_angle(theta);
        let n = self.theta.len();
        let first = self.theta[0];
        let last = self.theta[n - 1];
        if t < first || t > last {
            // segment across the ±π seam
            let span = first + 2.0 * PI - last;
            let offset = if t > last { t - last } else { t + 2.0 * PI - last };
            if span <= 0.0 {
                return self.values[0];
            }
            let f = offset / span;
            return self.values[n - 1] * (1.0 - f) + self.values[0] * f;
        }
        let idx = self.theta.partition_point(|&x| x <= t);
        if idx == 0 {
            return self.values[0];
        }
        if idx >= n {
            return self.values[n - 1];
        }
        let (t0, t1) = (self.theta[idx - 1], self.theta[idx]);
        let f = (t - t0) / (t1 - t0);
        self.values[idx - 1] * (1.0 - f) + self.values[idx] * f
    }

    pub fn knots(&self) -> &[f64] {
        &self.theta
    }
}

/// The family a weight belongs to.
#[derive(Clone)]
pub enum WeightKind {
    Lebesgue,
    /// `(1 - |λ|²) / |1 - λ e^{iθ}|²`, the Bernstein-Szegő weight.
    Poisson { lambda: Complex64 },
    /// `e^{|θ|^s}` for θ in [-π, π], Hölder-continuous of order s at θ = 0.
    Holder { s: f64 },
    Custom {
        label: String,
        eval: WeightFn,
        log_eval: Option<WeightFn>,
    },
    Sampled(Arc<SampledWeight>),
}

impl fmt::Debug for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightKind::Lebesgue => write!(f, "Lebesgue"),
            WeightKind::Poisson { lambda } => write!(f, "Poisson({lambda})"),
            WeightKind::Holder { s } => write!(f, "Holder({s})"),
            WeightKind::Custom { label, .. } => write!(f, "Custom({label})"),
            WeightKind::Sampled(s) => write!(f, "Sampled({} knots)", s.knots().len()),
        }
    }
}

/// A positive density on the circle together with the metadata quadrature
/// needs: points where it is not smooth and whether it is even in θ.
#[derive(Debug, Clone)]
pub struct CircleWeight {
    kind: WeightKind,
    scale: f64,
    singular_points: Vec<f64>,
    even: bool,
    normalized: bool,
}

impl CircleWeight {
    pub fn lebesgue() -> Self {
        Self {
            kind: WeightKind::Lebesgue,
            scale: 1.0,
            singular_points: Vec::new(),
            even: true,
            normalized: true,
        }
    }

    pub fn poisson(lambda: Complex64) -> Result<Self> {
        if !(lambda.norm() < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "poisson weight needs |lambda| < 1, got {lambda}"
            )));
        }
        Ok(Self {
            kind: WeightKind::Poisson { lambda },
            scale: 1.0,
            singular_points: Vec::new(),
            even: lambda.im == 0.0,
            normalized: true,
        })
    }

    /// The unnormalized weight `e^{|θ|^s}`.
    pub fn holder(s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "holder weight needs s > 0, got {s}"
            )));
        }
        Ok(Self {
            kind: WeightKind::Holder { s },
            scale: 1.0,
            singular_points: vec![0.0],
            even: true,
            normalized: false,
        })
    }

    pub fn custom(
        label: impl Into<String>,
        eval: WeightFn,
        log_eval: Option<WeightFn>,
        singular_points: Vec<f64>,
        even: bool,
    ) -> Self {
        Self {
            kind: WeightKind::Custom {
                label: label.into(),
                eval,
                log_eval,
            },
            scale: 1.0,
            singular_points: singular_points.into_iter().map(wrap_angle).collect(),
            even,
            normalized: false,
        }
    }

    pub fn sampled(samples: SampledWeight) -> Self {
        let knots = samples.knots().to_vec();
        Self {
            kind: WeightKind::Sampled(Arc::new(samples)),
            scale: 1.0,
            singular_points: knots,
            even: false,
            normalized: false,
        }
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    /// Multiplier applied on top of the family's base density.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn singular_points(&self) -> &[f64] {
        &self.singular_points
    }

    pub fn is_even(&self) -> bool {
        self.even
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Returns `alpha · w`.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be positive, got {alpha}"
            )));
        }
        let mut out = self.clone();
        out.scale *= alpha;
        out.normalized = self.normalized && alpha == 1.0;
        Ok(out)
    }

    fn base(&self, theta: f64) -> f64 {
        match &self.kind {
            WeightKind::Lebesgue => 1.0,
            WeightKind::Poisson { lambda } => {
                let xi = Complex64::from_polar(1.0, theta);
                (1.0 - lambda.norm_sqr()) / (Complex64::new(1.0, 0.0) - lambda * xi).norm_sqr()
            }
            WeightKind::Holder { s } => wrap_angle(theta).abs().powf(*s).exp(),
            WeightKind::Custom { eval, .. } => eval(wrap_angle(theta)),
            WeightKind::Sampled(sw) => sw.eval(theta),
        }
    }

    fn log_base(&self, theta: f64) -> f64 {
        match &self.kind {
            WeightKind::Lebesgue => 0.0,
            WeightKind::Poisson { lambda } => {
                let xi = Complex64::from_polar(1.0, theta);
                (1.0 - lambda.norm_sqr()).ln()
                    - (Complex64::new(1.0, 0.0) - lambda * xi).norm_sqr().ln()
            }
            WeightKind::Holder { s } => wrap_angle(theta).abs().powf(*s),
            WeightKind::Custom { eval, log_eval, .. } => match log_eval {
                Some(l) => l(wrap_angle(theta)),
                None => positive_ln(eval(wrap_angle(theta))),
            },
            WeightKind::Sampled(sw) => positive_ln(sw.eval(theta)),
        }
    }

    /// Density at `e^{iθ}`.
    pub fn eval(&self, theta: f64) -> f64 {
        self.scale * self.base(theta)
    }

    /// `log w(e^{iθ})`, evaluated analytically for the built-in families.
    pub fn log_eval(&self, theta: f64) -> f64 {
        self.scale.ln() + self.log_base(theta)
    }

    /// Stable identifier used for caching and reporting.
    pub fn id(&self) -> String {
        let base = match &self.kind {
            WeightKind::Lebesgue => "lebesgue".to_string(),
            WeightKind::Poisson { lambda } => {
                if lambda.im == 0.0 {
                    format!("poisson:{}", lambda.re)
                } else {
                    format!("poisson:{}{:+}i", lambda.re, lambda.im)
                }
            }
            WeightKind::Holder { s } => format!("holder:{s}"),
            WeightKind::Custom { label, .. } => format!("custom:{label}"),
            WeightKind::Sampled(sw) => format!("sampled:{}", sw.knots().len()),
        };
        if self.scale == 1.0 {
            base
        } else {
            format!("{base}*{:e}", self.scale)
        }
    }

    fn integration_domain(&self) -> Vec<f64> {
        let (lo, hi) = if self.even { (0.0, PI) } else { (-PI, PI) };
        let mut breaks = vec![lo, hi];
        breaks.extend(
            self.singular_points
                .iter()
                .copied()
                .filter(|&t| t > lo && t < hi),
        );
        if let WeightKind::Poisson { lambda } = self.kind {
            // the density peaks at θ = -arg λ
            if lambda.norm() > 0.0 {
                let peak = wrap_angle(-lambda.arg());
                if peak > lo && peak < hi {
                    breaks.push(peak);
                }
            }
        }
        breaks
    }

    /// `∫ w dm` and its quadrature error estimate.
    pub fn mass(&self, rel_tol: f64) -> Result<(f64, f64)> {
        let breaks = self.integration_domain();
        let quad = AdaptiveQuad::new(0.0, rel_tol).with_order(MOMENT_RULE_ORDER);
        let out = quad.integrate(|t| self.eval(t), &breaks)?;
        let factor = if self.even { 1.0 / PI } else { 1.0 / (2.0 * PI) };
        Ok((out.value * factor, out.error * factor))
    }
}

fn positive_ln(w: f64) -> f64 {
    if w > 0.0 {
        w.ln()
    } else {
        f64::NAN
    }
}

/// Parsed form of the CLI weight strings `lebesgue`, `poisson:0.5`,
/// `poisson:0.3+0.2i`, `holder:0.4`, `samples:<path>`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    Lebesgue,
    Poisson(Complex64),
    Holder(f64),
    Samples(String),
}

impl FromStr for WeightSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s, None),
        };
        let need = |what: &str| {
            arg.filter(|a| !a.is_empty())
                .ok_or_else(|| Error::Parse(format!("weight `{name}` needs a {what}")))
        };
        match name.to_ascii_lowercase().as_str() {
            "lebesgue" => match arg {
                None => Ok(WeightSpec::Lebesgue),
                Some(_) => Err(Error::Parse("lebesgue takes no parameter".into())),
            },
            "poisson" => Ok(WeightSpec::Poisson(crate::parse::parse_complex(need(
                "lambda",
            )?)?)),
            "holder" => {
                let v = need("exponent")?;
                let s = v
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad holder exponent `{v}`: {e}")))?;
                Ok(WeightSpec::Holder(s))
            }
            "samples" | "file" => Ok(WeightSpec::Samples(need("path")?.to_string())),
            other => Err(Error::Parse(format!("unknown weight kind `{other}`"))),
        }
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Lebesgue => write!(f, "lebesgue"),
            WeightSpec::Poisson(l) if l.im == 0.0 => write!(f, "poisson:{}", l.re),
            WeightSpec::Poisson(l) => write!(f, "poisson:{}{:+}i", l.re, l.im),
            WeightSpec::Holder(s) => write!(f, "holder:{s}"),
            WeightSpec::Samples(p) => write!(f, "samples:{p}"),
        }
    }
}

/// Builds a weight from its spec. Sampled weights are read from the path in
/// the spec; the file holds `θ, w` rows.
pub fn make_weight(spec: &WeightSpec, normalize: bool) -> Result<CircleWeight> {
    let w = match spec {
        WeightSpec::Lebesgue => CircleWeight::lebesgue(),
        WeightSpec::Poisson(l) => CircleWeight::poisson(*l)?,
        WeightSpec::Holder(s) => CircleWeight::holder(*s)?,
        WeightSpec::Samples(path) => {
            let text = std::fs::read_to_string(path)?;
            CircleWeight::sampled(SampledWeight::new(crate::io::parse_samples(&text)?)?)
        }
    };
    if normalize {
        normalize_weight(&w)
    } else {
        Ok(w)
    }
}

/// Rescales `w` so that `∫ w dm = 1`.
pub fn normalize_weight(w: &CircleWeight) -> Result<CircleWeight> {
    let analytic_mass = match w.kind {
        WeightKind::Lebesgue | WeightKind::Poisson { .. } => Some(w.scale),
        _ => None,
    };
    let mut out = w.clone();
    match analytic_mass {
        Some(mass) => {
            out.scale /= mass;
        }
        None => {
            let (mass, err) = w.mass(1e-14)?;
            if !mass.is_finite() || mass <= 0.0 {
                return Err(Error::NonIntegrable { mass });
            }
            if err > 1e-11 * mass {
                return Err(Error::NormalizationFailure {
                    mass,
                    error_estimate: err,
                });
            }
            out.scale /= mass;
        }
    }
    out.normalized = true;
    Ok(out)
}

/// Trigonometric moments `c_0 .. c_{n-1}` with per-moment error estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    values: Vec<Complex64>,
    errors: Vec<f64>,
    normalized: bool,
    tol: f64,
}

impl MomentSequence {
    /// Wraps externally supplied moments. `c_0` must be real and positive.
    pub fn from_values(values: Vec<Complex64>, normalized: bool) -> Result<Self> {
        let Some(c0) = values.first() else {
            return Err(Error::InvalidParameter("empty moment sequence".into()));
        };
        if !(c0.re > 0.0) || c0.im.abs() > 1e-12 * c0.re {
            return Err(Error::InvalidParameter(format!(
                "c_0 must be real and positive, got {c0}"
            )));
        }
        let errors = vec![0.0; values.len()];
        Ok(Self {
            values,
            errors,
            normalized,
            tol: 0.0,
        })
    }

    /// Replaces the error estimates, e.g. after reading a moment file.
    pub fn with_errors(mut self, errors: Vec<f64>) -> Result<Self> {
        if errors.len() != self.values.len() {
            return Err(Error::InvalidParameter(format!(
                "{} error estimates for {} moments",
                errors.len(),
                self.values.len()
            )));
        }
        self.errors = errors;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn errors(&self) -> &[f64] {
        &self.errors
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// `c_j` for any `|j| < n`, using `c_{-j} = conj(c_j)`.
    pub fn get(&self, j: isize) -> Complex64 {
        if j >= 0 {
            self.values[j as usize]
        } else {
            self.values[(-j) as usize].conj()
        }
    }

    /// First `n` moments.
    pub fn truncated(&self, n: usize) -> Self {
        let n = n.min(self.len());
        Self {
            values: self.values[..n].to_vec(),
            errors: self.errors[..n].to_vec(),
            normalized: self.normalized,
            tol: self.tol,
        }
    }

    /// `alpha · c_j` for every j.
    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            values: self.values.iter().map(|c| c * alpha).collect(),
            errors: self.errors.iter().map(|e| e * alpha).collect(),
            normalized: self.normalized && alpha == 1.0,
            tol: self.tol,
        }
    }
}

/// Computes `c_0 .. c_{n-1}` to relative tolerance `tol` (relative to the
/// total mass `c_0`, since individual moments may vanish).
pub fn compute_moments(w: &CircleWeight, n: usize, tol: f64) -> Result<MomentSequence> {
    if n == 0 {
        return Err(Error::InvalidParameter("moment count must be at least 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let (values, errors) = moment_range(w, 0, n, tol)?;
    Ok(MomentSequence {
        values,
        errors,
        normalized: w.normalized,
        tol,
    })
}

/// Composite grid shared by all moments up to `j_max`: adaptive in the
/// weight, then split so no panel is wider than `π / (2(j_max + 1))`. Each
/// panel's halves are therefore at most `π / (4(j_max + 1))` wide.
fn moment_panels(w: &CircleWeight, j_max: usize, tol: f64) -> Result<(Vec<(f64, f64)>, f64)> {
    let breaks = w.integration_domain();
    let quad = AdaptiveQuad::new(0.0, 0.25 * tol)
        .with_order(MOMENT_RULE_ORDER)
        .with_max_panels(200_000);
    let base = quad.integrate(|t| w.eval(t), &breaks)?;
    let factor = if w.even { 1.0 / PI } else { 1.0 / (2.0 * PI) };
    let mass = base.value * factor;
    if !mass.is_finite() || mass <= 0.0 {
        return Err(Error::NonIntegrable { mass });
    }
    let max_width = PI / (2.0 * (j_max as f64 + 1.0));
    let mut panels = Vec::with_capacity(base.panels.len());
    for p in &base.panels {
        let pieces = (p.width() / max_width).ceil().max(1.0) as usize;
        let h = p.width() / pieces as f64;
        for k in 0..pieces {
            let a = p.a + k as f64 * h;
            let b = if k + 1 == pieces { p.b } else { a + h };
            panels.push((a, b));
        }
    }
    Ok((panels, mass))
}

/// Moments `c_start .. c_{end-1}`.
pub(crate) fn moment_range(
    w: &CircleWeight,
    start: usize,
    end: usize,
    tol: f64,
) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let count = end - start;
    let (panels, mass) = moment_panels(w, end - 1, tol)?;
    let rule = GaussLegendre::new(MOMENT_RULE_ORDER);

    // (θ, weight for refined value, weight for refined-minus-coarse)
    let mut nodes: Vec<(f64, f64, f64)> = Vec::with_capacity(panels.len() * 3 * MOMENT_RULE_ORDER);
    for &(a, b) in &panels {
        let mid = 0.5 * (a + b);
        for (t, q) in rule.mapped(a, b) {
            nodes.push((t, 0.0, -q * w.eval(t)));
        }
        for (lo, hi) in [(a, mid), (mid, b)] {
            for (t, q) in rule.mapped(lo, hi) {
                let v = q * w.eval(t);
                nodes.push((t, v, v));
            }
        }
    }
    if nodes.iter().any(|n| !n.1.is_finite() || !n.2.is_finite()) {
        return Err(Error::NonIntegrable { mass: f64::NAN });
    }

    let even = w.even;
    // fixed chunking and an ordered reduction keep the sums bit-reproducible
    let partials: Vec<(Vec<Complex64>, Vec<Complex64>)> = nodes
        .par_chunks(NODE_CHUNK)
        .map(|chunk| accumulate(chunk, start, count, even))
        .collect();
    let mut value = vec![Complex64::new(0.0, 0.0); count];
    let mut diff = vec![Complex64::new(0.0, 0.0); count];
    for (v, d) in partials {
        for j in 0..count {
            value[j] += v[j];
            diff[j] += d[j];
        }
    }

    let factor = if even { 1.0 / PI } else { 1.0 / (2.0 * PI) };
    let values: Vec<Complex64> = value.iter().map(|v| v * factor).collect();
    let errors: Vec<f64> = diff.iter().map(|d| d.norm() * factor).collect();

    let target = tol * mass;
    if let Some((j, &e)) = errors
        .iter()
        .enumerate()
        .filter(|(_, e)| !(**e <= target))
        .max_by(|a, b| a.1.total_cmp(b.1))
    {
        return Err(Error::QuadratureNonconvergence {
            worst_index: Some(start + j),
            error_estimate: e,
            target,
        });
    }
    Ok((values, errors))
}

fn accumulate(
    chunk: &[(f64, f64, f64)],
    start: usize,
    count: usize,
    even: bool,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let zero = Complex64::new(0.0, 0.0);
    let mut value = vec![zero; count];
    let mut diff = vec![zero; count];
    if even {
        let mut value_re = vec![0.0; count];
        let mut diff_re = vec![0.0; count];
        for &(t, v, d) in chunk {
            let step = Complex64::from_polar(1.0, -t);
            let mut p = zero;
            for j in 0..count {
                if j % RESYNC_EVERY == 0 {
                    p = Complex64::from_polar(1.0, -((start + j) as f64) * t);
                }
                value_re[j] += v * p.re;
                diff_re[j] += d * p.re;
                p *= step;
            }
        }
        for j in 0..count {
            value[j] = Complex64::new(value_re[j], 0.0);
            diff[j] = Complex64::new(diff_re[j], 0.0);
        }
    } else {
        for &(t, v, d) in chunk {
            let step = Complex64::from_polar(1.0, -t);
            let mut p = zero;
            for j in 0..count {
                if j % RESYNC_EVERY == 0 {
                    p = Complex64::from_polar(1.0, -((start + j) as f64) * t);
                }
                value[j] += p * v;
                diff[j] += p * d;
                p *= step;
            }
        }
    }
    (value, diff)
}

/// Moments computed once per weight and extended on demand.
#[derive(Debug, Default)]
pub struct MomentCache {
    entries: Mutex<HashMap<String, MomentSequence>>,
}

impl MomentCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `c_0 .. c_{n-1}` for `w`, reusing cached moments computed at
    /// least as tightly as `tol` and computing only the missing tail.
    pub fn get(&self, w: &CircleWeight, n: usize, tol: f64) -> Result<MomentSequence> {
        if n == 0 {
            return Err(Error::InvalidParameter("moment count must be at least 1".into()));
        }
        let key = w.id();
        let mut entries = self.entries.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(cached) = entries.get_mut(&key) {
            if cached.tol <= tol {
                if cached.len() < n {
                    let (values, errors) = moment_range(w, cached.len(), n, cached.tol)?;
                    cached.values.extend(values);
                    cached.errors.extend(errors);
                }
                return Ok(cached.truncated(n));
            }
        }
        let fresh = compute_moments(w, n, tol)?;
        entries.insert(key, fresh.clone());
        Ok(fresh)
    }

    pub fn cached_len(&self, w: &CircleWeight) -> Option<usize> {
        let entries = self.entries.lock().unwrap_or_else(|e| e.into_inner());
        entries.get(&w.id()).map(MomentSequence::len)
    }
}
