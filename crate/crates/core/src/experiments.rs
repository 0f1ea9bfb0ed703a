//! End-to-end experiments: convergence rates of the kernel ratio at
//! `x_n = 1 - 1/n`, the f₁/f₂ comparison data, the Bernstein-Szegő scaling
//! check and the empirical comparison of both sides of the main estimate.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::entropy_sup_on_radius;
use crate::error::{Error, Result};
use crate::fit::power_law;
use crate::kernels::{universal_ratio, KernelContext, PointValues, DEFAULT_MAX_A};
use crate::measures::{normalize_weight, CircleWeight, MomentCache};
use crate::opuc::{levinson, VerblunskyCoefficients};

/// Default largest n for desk-scale rate runs.
pub const DEFAULT_RATE_N: usize = 2000;

/// Tail of a rate run: records with `n >= TAIL_FRACTION · N`.
pub const TAIL_FRACTION: f64 = 0.5;

/// `f₁ >= f₂ (1 - FIGURE2_TOLERANCE)` is required on the tail.
pub const FIGURE2_TOLERANCE: f64 = 1e-9;

/// Largest ratio `max/min` of `n · sup|δ_n|` accepted as "comparable to 1/n".
pub const POISSON_BAND: f64 = 4.0;

/// Deviation treated as zero when the entropy vanishes; the quotient form
/// is accurate to about nine digits next to its crossover.
pub const LEBESGUE_NOISE: f64 = 1e-9;

/// Differences below `ROUNDING_FACTOR · n · ε · |ratio|` are rounding noise
/// of the recursion and are reported as exactly zero.
const ROUNDING_FACTOR: f64 = 4.0;

/// Moments `0 ..= n_max` of `w`, pushed through the Levinson recursion.
pub fn prepare(
    w: &CircleWeight,
    n_max: usize,
    tol: f64,
    cache: &MomentCache,
) -> Result<Arc<VerblunskyCoefficients>> {
    let moments = cache.get(w, n_max + 1, tol)?;
    Ok(Arc::new(levinson(&moments)?))
}

/// Which kernel size pairs with `x_n = 1 - 1/n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum IndexConvention {
    /// `k_n` against `(1 - x_n^{2n}) / (n (1 - x_n²))`.
    #[default]
    Standard,
    /// `k_{n-1}` against the Lebesgue ratio with `n - 1` terms, as produced by
    /// an `n × n` Toeplitz solve for the degree `n - 1` polynomial.
    DenseSolve,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateConfig {
    pub n_max: usize,
    pub step: usize,
    pub tol: f64,
    pub convention: IndexConvention,
}

impl RateConfig {
    pub fn new(n_max: usize, step: usize) -> Self {
        Self {
            n_max,
            step,
            tol: crate::measures::DEFAULT_MOMENT_TOL,
            convention: IndexConvention::Standard,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.step == 0 || !self.n_max.is_multiple_of(self.step) || self.n_max / self.step < 3 {
            return Err(Error::InvalidParameter(format!(
                "need step >= 1, N a multiple of step and N/step >= 3; got N = {}, step = {}",
                self.n_max, self.step
            )));
        }
        if self.convention == IndexConvention::DenseSolve && self.step < 2 {
            return Err(Error::InvalidParameter(
                "the dense-solve index convention needs step >= 2".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRecord {
    pub n: usize,
    pub x_n: f64,
    /// `|k(x_n, x_n)/k(1, 1) - (1 - x_n^{2n}) / (n (1 - x_n²))|`
    pub d: f64,
    pub alpha_cand: Option<f64>,
    pub c_alpha_cand: Option<f64>,
}

/// Signed difference "Lebesgue ratio minus μ ratio" at one n.
fn rate_difference(v: &Arc<VerblunskyCoefficients>, n: usize, convention: IndexConvention) -> Result<f64> {
    let size = match convention {
        IndexConvention::Standard => n,
        IndexConvention::DenseSolve => n - 1,
    };
    let ctx = KernelContext::new(v.clone(), size)?;
    let x = Complex64::new(1.0 - 1.0 / n as f64, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let at_x = ctx.cd_kernel(x, x)?.re;
    let at_one = ctx.diagonal_at(one)?;
    let mu_ratio = at_x / at_one;
    let lebesgue_ratio = universal_ratio(x, x, size).re;
    let diff = lebesgue_ratio - mu_ratio;
    let noise = ROUNDING_FACTOR * size as f64 * f64::EPSILON * lebesgue_ratio.abs().max(mu_ratio.abs());
    Ok(if diff.abs() <= noise { 0.0 } else { diff })
}

/// Deviation `D(n)` at `x_n = 1 - 1/n` for `n = step, 2 step, …, N`, with the
/// successive-ratio exponent candidates
/// `alphaCand(k) = k (D(k-1)/D(k) - 1)` and `CalphaCand(k) = D(k) n^{alphaCand(k)}`.
///
/// The first row has no predecessor and its candidates are undefined, as are
/// rows where D vanishes.
pub fn rate_experiment(w: &CircleWeight, cfg: &RateConfig, cache: &MomentCache) -> Result<Vec<RateRecord>> {
    cfg.validate()?;
    let v = prepare(w, cfg.n_max, cfg.tol, cache)?;
    rate_from_coefficients(&v, cfg)
}

/// [`rate_experiment`] on precomputed Verblunsky coefficients.
pub fn rate_from_coefficients(v: &Arc<VerblunskyCoefficients>, cfg: &RateConfig) -> Result<Vec<RateRecord>> {
    cfg.validate()?;
    let ns: Vec<usize> = (cfg.step..=cfg.n_max).step_by(cfg.step).collect();
    let diffs = ns
        .par_iter()
        .map(|&n| rate_difference(v, n, cfg.convention))
        .collect::<Result<Vec<f64>>>()?;

    let mut records = Vec::with_capacity(ns.len());
    for (idx, (&n, &diff)) in ns.iter().zip(&diffs).enumerate() {
        let k = (idx + 1) as f64;
        let alpha = if idx == 0 || diff == 0.0 {
            None
        } else {
            Some(k * (diffs[idx - 1] / diff - 1.0)).filter(|a| a.is_finite())
        };
        let d = diff.abs();
        records.push(RateRecord {
            n,
            x_n: 1.0 - 1.0 / n as f64,
            d,
            alpha_cand: alpha,
            c_alpha_cand: alpha.map(|a| d * (n as f64).powf(a)),
        });
    }
    Ok(records)
}

/// Least-squares exponent α in `D ≈ C n^{-α}` over records with `n >= n_min`
/// and `D > 0`.
pub fn window_exponent(records: &[RateRecord], n_min: usize) -> Result<f64> {
    let (n, d): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter(|r| r.n >= n_min && r.d > 0.0)
        .map(|r| (r.n as f64, r.d))
        .unzip();
    if n.len() < 2 {
        return Err(Error::InsufficientSpan {
            points: n.len(),
            decades: 0.0,
        });
    }
    Ok(-power_law(&n, &d)?.exponent)
}

/// First n of the tail window of a run up to `n_max`.
pub fn tail_start(n_max: usize) -> usize {
    (TAIL_FRACTION * n_max as f64).ceil() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Figure2Row {
    pub n: usize,
    pub f1: f64,
    pub f2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure2Table {
    pub s: f64,
    /// Final `CalphaCand`, the constant in `f₂ = C n^{-s}`.
    pub constant: Option<f64>,
    pub final_alpha: Option<f64>,
    pub tail_start: usize,
    /// Whether `f₁ >= f₂ (1 - tol)` on every tail row; `None` without an f₂.
    pub f1_dominates_tail: Option<bool>,
    pub rows: Vec<Figure2Row>,
}

/// `f₁(n) = D(n)` and `f₂(n) = C n^{-s}` with `C` the last `CalphaCand`.
pub fn figure2_from_records(records: &[RateRecord], s: f64) -> Result<Figure2Table> {
    let last = records
        .last()
        .ok_or_else(|| Error::InvalidParameter("empty rate table".into()))?;
    let constant = last.c_alpha_cand;
    let tail = tail_start(last.n);
    let rows: Vec<Figure2Row> = records
        .iter()
        .map(|r| Figure2Row {
            n: r.n,
            f1: r.d,
            f2: constant.map(|c| c * (r.n as f64).powf(-s)),
        })
        .collect();
    let dominates = constant.map(|_| {
        rows.iter()
            .filter(|r| r.n >= tail)
            .all(|r| r.f2.is_some_and(|f2| r.f1 >= f2 * (1.0 - FIGURE2_TOLERANCE)))
    });
    Ok(Figure2Table {
        s,
        constant,
        final_alpha: last.alpha_cand,
        tail_start: tail,
        f1_dominates_tail: dominates,
        rows,
    })
}

/// Rate run for the normalized Hölder weight of order `s ∈ (0, 1/2)` and
/// its f₁/f₂ table.
pub fn figure2_data(s: f64, cfg: &RateConfig, cache: &MomentCache) -> Result<Figure2Table> {
    if !(s > 0.0 && s < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "figure data needs s in (0, 1/2), got {s}"
        )));
    }
    let w = normalize_weight(&CircleWeight::holder(s)?)?;
    let records = rate_experiment(&w, cfg, cache)?;
    figure2_from_records(&records, s)
}

/// The center, `radii` interior circles at `radius · i / (radii + 1)` and the
/// boundary circle, each with `angles` equally spaced points.
pub fn polar_grid(center: Complex64, radius: f64, radii: usize, angles: usize) -> Vec<Complex64> {
    let mut points = vec![center];
    if angles == 0 {
        return points;
    }
    for i in 1..=radii + 1 {
        let r = radius * i as f64 / (radii + 1) as f64;
        for j in 0..angles {
            let t = 2.0 * std::f64::consts::PI * j as f64 / angles as f64;
            points.push(center + Complex64::from_polar(r, t));
        }
    }
    points
}

/// Largest deviation over all unordered pairs (the deviation is symmetric
/// under swapping z₁ and z₂).
fn max_pair_deviation(ctx: &KernelContext, zeta: Complex64, points: &[Complex64]) -> Result<f64> {
    let values = points
        .par_iter()
        .map(|&z| ctx.point(z))
        .collect::<Result<Vec<PointValues>>>()?;
    ctx.diagonal_at(zeta)?;
    let per_row = (0..values.len())
        .into_par_iter()
        .map(|i| {
            let mut worst: f64 = 0.0;
            for j in i..values.len() {
                let s = ctx.deviation_from_points(zeta, &values[i], &values[j])?;
                worst = worst.max(s.deviation);
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(per_row.into_iter().fold(0.0, f64::max))
}

/// Deviation samples for every ordered pair of `points`.
pub fn deviation_grid(ctx: &KernelContext, zeta: Complex64, points: &[Complex64]) -> Result<Vec<crate::kernels::DeviationSample>> {
    let values = points
        .iter()
        .map(|&z| ctx.point(z))
        .collect::<Result<Vec<PointValues>>>()?;
    let mut out = Vec::with_capacity(values.len() * values.len());
    for p1 in &values {
        for p2 in &values {
            out.push(ctx.deviation_from_points(zeta, p1, p2)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UvGrid {
    pub radii: usize,
    pub angles: usize,
}

impl Default for UvGrid {
    fn default() -> Self {
        Self { radii: 4, angles: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonRow {
    pub n: usize,
    pub sup: f64,
    pub n_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonCheck {
    pub lambda: Complex64,
    pub rows: Vec<PoissonRow>,
    /// max/min of `n · sup` over the rows; `None` when every sup vanishes.
    pub band_ratio: Option<f64>,
    pub within_band: bool,
}

/// `sup |δ_n(u, v)|` over `|u|, |v| <= 1` with `z₁ = e^{u/n}`, `z₂ = e^{v/n}`,
/// `ζ = 1`, for the weight `(1 - |λ|²)/|1 - λξ|²`. λ = 0 is the Lebesgue
/// weight.
pub fn poisson_example_check(
    lambda: Complex64,
    n_list: &[usize],
    grid: UvGrid,
    tol: f64,
    cache: &MomentCache,
) -> Result<PoissonCheck> {
    if !(lambda.norm() < 1.0) {
        return Err(Error::InvalidParameter(format!("need |lambda| < 1, got {lambda}")));
    }
    let Some(&n_max) = n_list.iter().max() else {
        return Err(Error::InvalidParameter("empty n list".into()));
    };
    let w = if lambda.norm() == 0.0 {
        CircleWeight::lebesgue()
    } else {
        CircleWeight::poisson(lambda)?
    };
    let v = prepare(&w, n_max, tol, cache)?;
    let uv = polar_grid(Complex64::new(0.0, 0.0), 1.0, grid.radii, grid.angles);
    let one = Complex64::new(1.0, 0.0);

    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let ctx = KernelContext::new(v.clone(), n)?;
        let points: Vec<Complex64> = uv.iter().map(|u| (u / n as f64).exp()).collect();
        let sup = max_pair_deviation(&ctx, one, &points)?;
        rows.push(PoissonRow {
            n,
            sup,
            n_sup: n as f64 * sup,
        });
    }
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r.n_sup), hi.max(r.n_sup)));
    let band_ratio = (lo > 0.0).then(|| hi / lo);
    let within_band = match band_ratio {
        Some(r) => r <= POISSON_BAND,
        None => hi == 0.0,
    };
    Ok(PoissonCheck {
        lambda,
        rows,
        band_ratio,
        within_band,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub radii: usize,
    pub angles: usize,
}

impl Default for PolarGrid {
    fn default() -> Self {
        Self {
            radii: 17,
            angles: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub weight: String,
    pub zeta: Complex64,
    pub a: f64,
    pub n: usize,
    pub grid: PolarGrid,
    /// max deviation over pairs of grid points in `B(ζ, A/n)`
    pub lhs: f64,
    /// `max |z - ζ|` over the grid
    pub delta: f64,
    /// `sup K_μ(ρζ)` over `ρ ∈ [1 - δ, 1)`
    pub entropy_sup: f64,
    /// `e^{4A} sqrt(entropy_sup)`
    pub rhs_core: f64,
    /// `lhs / rhs_core`; `None` when the entropy vanishes
    pub empirical_ratio: Option<f64>,
    /// false only if the entropy vanishes while the deviation does not
    pub consistent: bool,
}

/// Both sides of the main estimate on a polar grid of `B(ζ, A/n)`.
pub fn theorem1_check(
    w: &CircleWeight,
    v: &Arc<VerblunskyCoefficients>,
    zeta: Complex64,
    a: f64,
    n: usize,
    grid: PolarGrid,
) -> Result<Theorem1Report> {
    if !(a >= 1.0) {
        return Err(Error::InvalidParameter(format!("need A >= 1, got {a}")));
    }
    if !((n as f64) >= 10.0 * a) {
        return Err(Error::InvalidParameter(format!("need n >= 10 A, got n = {n}, A = {a}")));
    }
    if (zeta.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("zeta must be unimodular, got {zeta}")));
    }
    let ctx = KernelContext::new(v.clone(), n)?.with_max_a(a.max(DEFAULT_MAX_A));
    let points = polar_grid(zeta, a / n as f64, grid.radii, grid.angles);
    let lhs = max_pair_deviation(&ctx, zeta, &points)?;
    let delta = points.iter().map(|z| (z - zeta).norm()).fold(0.0, f64::max);
    let entropy_sup = entropy_sup_on_radius(w, zeta, 1.0 - delta)?;
    let rhs_core = (4.0 * a).exp() * entropy_sup.sqrt();
    let empirical_ratio = (entropy_sup > 0.0).then(|| lhs / rhs_core);
    Ok(Theorem1Report {
        weight: w.id(),
        zeta,
        a,
        n,
        grid,
        lhs,
        delta,
        entropy_sup,
        rhs_core,
        empirical_ratio,
        consistent: entropy_sup > 0.0 || lhs <= LEBESGUE_NOISE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Sweep {
    pub reports: Vec<Theorem1Report>,
    /// (min, max) of the empirical ratio over the sweep
    pub ratio_range: Option<(f64, f64)>,
}

/// [`theorem1_check`] over several n with one set of Verblunsky coefficients.
pub fn theorem1_sweep(
    w: &CircleWeight,
    zeta: Complex64,
    a: f64,
    ns: &[usize],
    grid: PolarGrid,
    tol: f64,
    cache: &MomentCache,
) -> Result<Theorem1Sweep> {
    let Some(&n_max) = ns.iter().max() else {
        return Err(Error::InvalidParameter("empty n list".into()));
    };
    let v = prepare(w, n_max, tol, cache)?;
    let reports = ns
        .iter()
        .map(|&n| theorem1_check(w, &v, zeta, a, n, grid))
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = reports.iter().filter_map(|r| r.empirical_ratio).collect();
    let ratio_range = (!ratios.is_empty()).then(|| {
        ratios
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(*r), hi.max(*r)))
    });
    Ok(Theorem1Sweep {
        reports,
        ratio_range,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn config_validation() {
        assert!(RateConfig::new(100, 20).validate().is_ok());
        assert!(RateConfig::new(100, 30).validate().is_err());
        assert!(RateConfig::new(40, 20).validate().is_err());
        assert!(RateConfig::new(100, 0).validate().is_err());
        let mut cfg = RateConfig::new(3, 1);
        assert!(cfg.validate().is_ok());
        cfg.convention = IndexConvention::DenseSolve;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn lebesgue_rate_is_zero() {
        let cache = MomentCache::new();
        let records = rate_experiment(&CircleWeight::lebesgue(), &RateConfig::new(100, 20), &cache).unwrap();
        assert_eq!(records.len(), 5);
        for r in &records {
            assert_eq!(r.d, 0.0);
            assert!(r.alpha_cand.is_none() && r.c_alpha_cand.is_none());
        }
        let fig = figure2_from_records(&records, 0.4).unwrap();
        assert!(fig.constant.is_none() && fig.f1_dominates_tail.is_none());
        assert!(fig.rows.iter().all(|r| r.f1 == 0.0 && r.f2.is_none()));
    }

    #[test]
    fn alpha_candidates_follow_successive_ratios() {
        // synthetic D(n) = n^{-1/2} through the record builder
        let v = Arc::new(VerblunskyCoefficients::new(vec![c(0.0, 0.0); 8], 1.0).unwrap());
        let cfg = RateConfig::new(8, 2);
        let records = rate_from_coefficients(&v, &cfg).unwrap();
        assert_eq!(records.iter().map(|r| r.n).collect::<Vec<_>>(), vec![2, 4, 6, 8]);
        assert!(records[0].alpha_cand.is_none());
        assert!((records[3].x_n - 0.875).abs() < 1e-15);
    }

    #[test]
    fn polar_grid_layout() {
        let g = polar_grid(c(1.0, 0.0), 0.1, 17, 32);
        assert_eq!(g.len(), 1 + 18 * 32);
        let max = g.iter().map(|z| (z - 1.0).norm()).fold(0.0, f64::max);
        assert!((max - 0.1).abs() < 1e-15);
        assert_eq!(polar_grid(c(0.0, 0.0), 1.0, 0, 4).len(), 5);
        assert_eq!(polar_grid(c(0.0, 0.0), 1.0, 3, 0).len(), 1);
    }

    #[test]
    fn theorem1_preconditions() {
        let w = CircleWeight::lebesgue();
        let v = Arc::new(VerblunskyCoefficients::new(vec![c(0.0, 0.0); 50], 1.0).unwrap());
        let g = PolarGrid::default();
        assert!(theorem1_check(&w, &v, c(1.0, 0.0), 0.5, 50, g).is_err());
        assert!(theorem1_check(&w, &v, c(1.0, 0.0), 6.0, 50, g).is_err());
        assert!(theorem1_check(&w, &v, c(0.9, 0.0), 1.0, 50, g).is_err());
    }

    #[test]
    fn lebesgue_theorem1_is_consistent() {
        let w = CircleWeight::lebesgue();
        let v = Arc::new(VerblunskyCoefficients::new(vec![c(0.0, 0.0); 40], 1.0).unwrap());
        let grid = PolarGrid { radii: 5, angles: 8 };
        let r = theorem1_check(&w, &v, c(0.0, 1.0), 1.0, 40, grid).unwrap();
        // near-diagonal pairs just above the crossover carry ~1e-12 rounding
        assert!(r.lhs < 1e-10, "lhs {}", r.lhs);
        assert_eq!(r.entropy_sup, 0.0);
        assert!(r.empirical_ratio.is_none());
        assert!(r.consistent);
    }

    #[test]
    fn lebesgue_poisson_check_vanishes() {
        let cache = MomentCache::new();
        let grid = UvGrid { radii: 3, angles: 8 };
        let check = poisson_example_check(c(0.0, 0.0), &[20, 40], grid, 1e-12, &cache).unwrap();
        assert!(check.rows.iter().all(|r| r.sup < 1e-13));
        assert!(poisson_example_check(c(1.0, 0.0), &[20], grid, 1e-12, &cache).is_err());
    }
}
