//! The entropy function `K_μ(z) = log P[w](z) - P[log w](z)`, where `P`
//! denotes the Poisson extension into the disk, and fits of its radial decay.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{power_law, PowerFit};
use crate::measures::CircleWeight;
use crate::quad::AdaptiveQuad;

/// Results in `[-NEGATIVE_SLACK, 0)` are clamped to zero.
pub const NEGATIVE_SLACK: f64 = 1e-10;

/// Panels near the Poisson peak go down to `(1 - |z|) / PEAK_REFINEMENT`.
const PEAK_REFINEMENT: f64 = 64.0;

/// Relative change at which the sup over a radius stops refining.
const SUP_STABILITY: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonQuad {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for PoissonQuad {
    fn default() -> Self {
        Self {
            rel_tol: 1e-13,
            abs_tol: 1e-300,
        }
    }
}

/// `∫ f(e^{iθ}) (1 - |z|²) / |1 - e^{-iθ} z|² dθ/2π` for `|z| < 1`.
///
/// `f` takes the angle θ. Panel edges are placed at the kernel peak
/// `θ = arg z`, geometrically around it down to scale `(1 - |z|)/64`, and at
/// every singular point of `f`.
pub fn poisson_integral<F>(f: F, z: Complex64, singular_points: &[f64], quad: PoissonQuad) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let r = z.norm();
    if !(r < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Poisson integral needs |z| < 1, got {r}"
        )));
    }
    let alpha = if r > 0.0 { z.arg() } else { 0.0 };
    let eps = 1.0 - r;
    let (lo, hi) = (alpha - PI, alpha + PI);

    let mut breaks = vec![lo, hi, alpha];
    let mut h = eps / PEAK_REFINEMENT;
    while h < PI {
        breaks.push(alpha - h);
        breaks.push(alpha + h);
        h *= 2.0;
    }
    for &s in singular_points {
        let mut t = s + 2.0 * PI * ((alpha - s) / (2.0 * PI)).round();
        if t <= lo {
            t += 2.0 * PI;
        }
        if t > lo && t < hi {
            breaks.push(t);
        }
    }

    let kernel = move |theta: f64| {
        let half = 0.5 * (theta - alpha);
        let s = half.sin();
        (1.0 - r) * (1.0 + r) / (eps * eps + 4.0 * r * s * s)
    };
    let out = AdaptiveQuad::new(quad.abs_tol, quad.rel_tol)
        .with_max_panels(50_000)
        .integrate(|t| f(t) * kernel(t), &breaks)?;
    Ok(out.value / (2.0 * PI))
}

/// `e^x - 1 - x` without cancellation for small `x`.
fn exp_excess(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        x2 * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x * (1.0 / 120.0 + x * (1.0 / 720.0 + x / 5040.0)))))
    } else {
        x.exp_m1() - x
    }
}

/// `K_μ(z)`.
///
/// Evaluated as `log(1 + P[e^{h} - 1 - h])` with `h = log w - P[log w](z)`,
/// which equals `log P[w] - P[log w]` because the Poisson kernel has unit
/// mass and `P[h](z) = 0`. The integrand is nonnegative, so small entropies
/// keep their relative accuracy.
pub fn entropy_at(w: &CircleWeight, z: Complex64) -> Result<f64> {
    let sing = w.singular_points();
    let mean_log = poisson_integral(
        |t| w.log_eval(t),
        z,
        sing,
        PoissonQuad {
            rel_tol: 1e-14,
            abs_tol: 1e-14,
        },
    )?;
    if !mean_log.is_finite() {
        return Err(Error::InvalidParameter(
            "log w is not integrable against the Poisson kernel".into(),
        ));
    }
    let excess = poisson_integral(
        |t| exp_excess(w.log_eval(t) - mean_log),
        z,
        sing,
        PoissonQuad {
            rel_tol: 1e-12,
            abs_tol: 1e-300,
        },
    )?;
    let value = excess.ln_1p();
    clamp_entropy(value, mean_log + value, mean_log)
}

/// `K_μ(z)` as the literal difference `log P[w](z) - P[log w](z)`.
pub fn entropy_at_direct(w: &CircleWeight, z: Complex64) -> Result<f64> {
    let sing = w.singular_points();
    let mass = poisson_integral(|t| w.eval(t), z, sing, PoissonQuad::default())?;
    let mean_log = poisson_integral(
        |t| w.log_eval(t),
        z,
        sing,
        PoissonQuad {
            rel_tol: 1e-13,
            abs_tol: 1e-15,
        },
    )?;
    let value = mass.ln() - mean_log;
    clamp_entropy(value, mass.ln(), mean_log)
}

fn clamp_entropy(value: f64, log_poisson_mass: f64, poisson_log: f64) -> Result<f64> {
    if value.is_nan() || value < -NEGATIVE_SLACK {
        return Err(Error::NegativeEntropy {
            value,
            log_poisson_mass,
            poisson_log,
        });
    }
    Ok(value.max(0.0))
}

/// `sup K_μ(ρζ)` over `ρ ∈ [rho_min, 1)`.
///
/// Scans `1 - ρ = (1 - rho_min) 2^{-k/m}` over three decades, doubling the
/// density `m` until the sup moves by less than 0.1%.
pub fn entropy_sup_on_radius(w: &CircleWeight, zeta: Complex64, rho_min: f64) -> Result<f64> {
    if !(rho_min > 0.0 && rho_min < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "rho_min must lie in (0, 1), got {rho_min}"
        )));
    }
    let eps0 = 1.0 - rho_min;
    let at = |k: usize, m: usize| -> Result<f64> {
        let eps = eps0 * 2f64.powf(-(k as f64) / m as f64);
        entropy_at(w, zeta * (1.0 - eps))
    };

    let mut density = 1;
    let values: Vec<f64> = (0..=10)
        .into_par_iter()
        .map(|k| at(k, 1))
        .collect::<Result<_>>()?;
    let mut sup = values.iter().copied().fold(0.0, f64::max);
    while density < 64 {
        density *= 2;
        // only the new odd points of the finer grid
        let fresh: Vec<f64> = (0..10 * density / 2)
            .into_par_iter()
            .map(|i| at(2 * i + 1, density))
            .collect::<Result<_>>()?;
        let refined = fresh.iter().copied().fold(sup, f64::max);
        let settled = refined - sup <= SUP_STABILITY * refined;
        sup = refined;
        if settled {
            break;
        }
    }
    Ok(sup)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    /// `K ≈ C (1 - ρ)^β`
    Plain,
    /// `K ≈ C ((1 - ρ) |log(1 - ρ)|)^β`
    LogCorrected,
}

impl FitModel {
    pub fn scale(self, one_minus_rho: f64) -> f64 {
        match self {
            FitModel::Plain => one_minus_rho,
            FitModel::LogCorrected => one_minus_rho * one_minus_rho.ln().abs(),
        }
    }
}

/// `K_μ(ρζ)` along a set of radii, with optional fitted models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyProfile {
    pub zeta: Complex64,
    pub rho: Vec<f64>,
    pub values: Vec<f64>,
    pub plain: Option<PowerFit>,
    pub log_corrected: Option<PowerFit>,
}

impl EntropyProfile {
    pub fn one_minus_rho(&self) -> Vec<f64> {
        self.rho.iter().map(|r| 1.0 - r).collect()
    }
}

/// `points` values of `1 - ρ` spaced geometrically from `min` to `max`.
pub fn geometric_gaps(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max < 1.0 && min < max) || points < 2 {
        return Err(Error::InvalidParameter(format!(
            "need 0 < min < max < 1 and two or more points, got [{min}, {max}] x {points}"
        )));
    }
    let ratio = (max / min).ln() / (points - 1) as f64;
    Ok((0..points)
        .map(|k| min * (ratio * k as f64).exp())
        .collect())
}

/// Evaluates `K_μ((1 - g) ζ)` for every gap `g`.
pub fn entropy_profile(w: &CircleWeight, zeta: Complex64, gaps: &[f64]) -> Result<EntropyProfile> {
    let values = gaps
        .par_iter()
        .map(|g| entropy_at(w, zeta * (1.0 - g)))
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyProfile {
        zeta,
        rho: gaps.iter().map(|g| 1.0 - g).collect(),
        values,
        plain: None,
        log_corrected: None,
    })
}

/// Least-squares fit of `log K` against `log` of the model's scale variable.
pub fn fit_entropy_exponent(profile: &EntropyProfile, model: FitModel) -> Result<PowerFit> {
    let gaps = profile.one_minus_rho();
    let points = gaps.len();
    let (lo, hi) = gaps
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), g| (lo.min(*g), hi.max(*g)));
    let decades = if points > 0 { (hi / lo).log10() } else { 0.0 };
    if points < 8 || !(decades >= 2.0 - 1e-9) {
        return Err(Error::InsufficientSpan { points, decades });
    }
    let scales: Vec<f64> = gaps.iter().map(|g| model.scale(*g)).collect();
    power_law(&scales, &profile.values)
}

/// Fits both models and stores them on the profile.
pub fn fit_both(profile: &mut EntropyProfile) -> Result<()> {
    profile.plain = Some(fit_entropy_exponent(profile, FitModel::Plain)?);
    profile.log_corrected = Some(fit_entropy_exponent(profile, FitModel::LogCorrected)?);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_mass() {
        for z in [c(0.0, 0.0), c(0.5, 0.5), c(0.999, 0.0), c(-0.3, 0.9)] {
            let v = poisson_integral(|_| 1.0, z, &[], PoissonQuad::default()).unwrap();
            assert!((v - 1.0).abs() < 1e-13, "z={z} v={v}");
        }
        assert!(poisson_integral(|_| 1.0, c(1.0, 0.0), &[], PoissonQuad::default()).is_err());
    }

    #[test]
    fn harmonic_extension_of_poisson_weight() {
        let lambda = c(0.5, 0.0);
        let w = CircleWeight::poisson(lambda).unwrap();
        let one = c(1.0, 0.0);
        for z in [c(0.3, 0.2), c(0.9, 0.0), c(-0.5, -0.6)] {
            let got = poisson_integral(|t| w.eval(t), z, &[], PoissonQuad::default()).unwrap();
            let want = (1.0 - (lambda * z).norm_sqr()) / (one - lambda * z).norm_sqr();
            assert!((got - want).abs() < 1e-12 * want);
            let got = poisson_integral(|t| w.log_eval(t), z, &[], PoissonQuad::default()).unwrap();
            let want = (0.75f64 / (one - lambda * z).norm_sqr()).ln();
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn poisson_entropy_closed_form() {
        let w = CircleWeight::poisson(c(0.5, 0.0)).unwrap();
        let k = entropy_at(&w, c(0.8, 0.0)).unwrap();
        assert!((k - (0.84f64 / 0.75).ln()).abs() < 1e-12);
        let direct = entropy_at_direct(&w, c(0.8, 0.0)).unwrap();
        assert!((direct - k).abs() < 1e-12);
    }

    #[test]
    fn lebesgue_entropy_vanishes() {
        let w = CircleWeight::lebesgue();
        for z in [c(0.0, 0.0), c(0.99, 0.0), c(0.2, -0.7)] {
            assert!(entropy_at(&w, z).unwrap().abs() < 1e-14);
        }
        assert_eq!(entropy_sup_on_radius(&w, c(1.0, 0.0), 0.9).unwrap(), 0.0);
    }

    #[test]
    fn exp_excess_matches_direct_form() {
        for x in [-0.5f64, -1e-3, 1e-5, 0.009, 0.011, 2.0] {
            // long Taylor sum, no cancellation
            let (mut term, mut reference) = (x * x / 2.0, 0.0);
            for k in 3..60 {
                reference += term;
                term *= x / k as f64;
            }
            assert!((exp_excess(x) - reference).abs() <= 1e-14 * reference.abs(), "x={x}");
        }
    }

    #[test]
    fn holder_oracle_values() {
        // mpmath, 30 digits, at ρ = 1 - 1/n
        let w = CircleWeight::holder(0.4).unwrap();
        let oracle = [
            (4.0, 0.059_436_310_033_918_06),
            (64.0, 0.017_501_401_942_711_756),
            (1024.0, 0.002_695_916_104_707_157_5),
        ];
        for (n, want) in oracle {
            let got = entropy_at(&w, c(1.0 - 1.0 / n, 0.0)).unwrap();
            assert!((got - want).abs() < 1e-10 * want, "n={n}: {got} vs {want}");
        }
    }

    #[test]
    fn fit_on_exact_power_law() {
        let gaps = geometric_gaps(1e-4, 1e-1, 10).unwrap();
        let profile = EntropyProfile {
            zeta: c(1.0, 0.0),
            rho: gaps.iter().map(|g| 1.0 - g).collect(),
            values: gaps.iter().map(|g| g.powf(0.8)).collect(),
            plain: None,
            log_corrected: None,
        };
        let fit = fit_entropy_exponent(&profile, FitModel::Plain).unwrap();
        assert!((fit.exponent - 0.8).abs() < 1e-12);
        assert!(fit.max_rel_residual < 1e-10);
    }

    #[test]
    fn fit_requires_span() {
        let gaps = geometric_gaps(1e-2, 1e-1, 10).unwrap();
        let profile = EntropyProfile {
            zeta: c(1.0, 0.0),
            rho: gaps.iter().map(|g| 1.0 - g).collect(),
            values: gaps.clone(),
            plain: None,
            log_corrected: None,
        };
        let err = fit_entropy_exponent(&profile, FitModel::Plain).unwrap_err();
        assert!(matches!(err, Error::InsufficientSpan { .. }));
        let short = EntropyProfile {
            rho: profile.rho[..5].to_vec(),
            values: profile.values[..5].to_vec(),
            ..profile
        };
        assert!(fit_entropy_exponent(&short, FitModel::Plain).is_err());
    }
}
