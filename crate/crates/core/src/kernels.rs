//! Christoffel-Darboux kernels and their deviation from the universal
//! (Lebesgue) kernel ratio.
//!
//! `k_n(z1, z2) = Σ_{k<n} conj(φ_k(z2)) φ_k(z1)
//!             = (conj(φ_n*(z2)) φ_n*(z1) - conj(φ_n(z2)) φ_n(z1)) / (1 - conj(z2) z1)`
//!
//! Both forms are evaluated with a running Szegő recursion at the points, so
//! a kernel value costs O(n) time and O(1) memory.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opuc::{SzegoWalker, VerblunskyCoefficients};

/// Below this `|1 - conj(z2) z1|` the quotient form switches to the sum.
pub const CD_CROSSOVER: f64 = 1e-6;

/// Within this `|1 - conj(z2) z1|` the universal ratio goes through
/// logarithms and `expm1` instead of the plain quotient.
pub const UNIVERSAL_LOG_RADIUS: f64 = 0.5;

/// Points up to modulus `e^{A/n}` are accepted, with this default `A`.
pub const DEFAULT_MAX_A: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum KernelStrategy {
    SumForm,
    #[default]
    CdForm,
}

/// φ_n(z) and φ_n*(z) at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValues {
    pub z: Complex64,
    pub phi: Complex64,
    pub phi_star: Complex64,
}

/// Everything needed to evaluate `k_{μ,n}`: the recursion coefficients, the
/// degree bound and the evaluation strategy. The diagonal `k_n(ζ, ζ)` is
/// cached per ζ.
#[derive(Debug)]
pub struct KernelContext {
    n: usize,
    verblunsky: Arc<VerblunskyCoefficients>,
    strategy: KernelStrategy,
    max_a: f64,
    diagonal: RwLock<HashMap<(u64, u64), f64>>,
}

impl KernelContext {
    pub fn new(verblunsky: Arc<VerblunskyCoefficients>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("kernel degree n must be at least 1".into()));
        }
        if verblunsky.len() < n {
            return Err(Error::InvalidParameter(format!(
                "kernel of size {n} needs {n} Verblunsky coefficients, only {} available",
                verblunsky.len()
            )));
        }
        Ok(Self {
            n,
            verblunsky,
            strategy: KernelStrategy::default(),
            max_a: DEFAULT_MAX_A,
            diagonal: RwLock::new(HashMap::new()),
        })
    }

    pub fn with_strategy(mut self, strategy: KernelStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_max_a(mut self, max_a: f64) -> Self {
        self.max_a = max_a;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn strategy(&self) -> KernelStrategy {
        self.strategy
    }

    pub fn verblunsky(&self) -> &Arc<VerblunskyCoefficients> {
        &self.verblunsky
    }

    pub fn radius_limit(&self) -> f64 {
        (self.max_a / self.n as f64).exp().max(1.0)
    }

    fn check_point(&self, z: Complex64) -> Result<()> {
        let limit = self.radius_limit();
        let modulus = z.norm();
        if !modulus.is_finite() || modulus > limit {
            return Err(Error::OutsideSupportedRegion { modulus, limit });
        }
        Ok(())
    }

    /// φ_n(z), φ_n*(z).
    pub fn point(&self, z: Complex64) -> Result<PointValues> {
        self.check_point(z)?;
        let mut walker = SzegoWalker::new(&self.verblunsky, z);
        for _ in 0..self.n {
            walker.step(&self.verblunsky);
        }
        Ok(PointValues {
            z,
            phi: walker.phi(),
            phi_star: walker.phi_star(),
        })
    }

    /// `Σ_{k<n} conj(φ_k(z2)) φ_k(z1)`.
    pub fn sum_kernel(&self, z1: Complex64, z2: Complex64) -> Result<Complex64> {
        self.check_point(z1)?;
        self.check_point(z2)?;
        let v = &*self.verblunsky;
        let mut w1 = SzegoWalker::new(v, z1);
        let mut acc = Complex64::new(0.0, 0.0);
        if z1 == z2 {
            let mut diag = 0.0;
            for k in 0..self.n {
                diag += w1.phi().norm_sqr();
                if k + 1 < self.n {
                    w1.step(v);
                }
            }
            return Ok(Complex64::new(diag, 0.0));
        }
        let mut w2 = SzegoWalker::new(v, z2);
        for k in 0..self.n {
            acc += w2.phi().conj() * w1.phi();
            if k + 1 < self.n {
                w1.step(v);
                w2.step(v);
            }
        }
        Ok(acc)
    }

    /// Quotient form from precomputed point values, falling back to the sum
    /// near the removable singularity.
    pub fn kernel_from_points(&self, p1: &PointValues, p2: &PointValues) -> Result<Complex64> {
        let denom = Complex64::new(1.0, 0.0) - p2.z.conj() * p1.z;
        if denom.norm() < CD_CROSSOVER {
            return self.sum_kernel(p1.z, p2.z);
        }
        Ok((p2.phi_star.conj() * p1.phi_star - p2.phi.conj() * p1.phi) / denom)
    }

    /// `k_{μ,n}(z1, z2)` using the configured strategy.
    pub fn cd_kernel(&self, z1: Complex64, z2: Complex64) -> Result<Complex64> {
        match self.strategy {
            KernelStrategy::SumForm => self.sum_kernel(z1, z2),
            KernelStrategy::CdForm => {
                let denom = Complex64::new(1.0, 0.0) - z2.conj() * z1;
                if denom.norm() < CD_CROSSOVER {
                    return self.sum_kernel(z1, z2);
                }
                let p1 = self.point(z1)?;
                let p2 = if z1 == z2 { p1 } else { self.point(z2)? };
                self.kernel_from_points(&p1, &p2)
            }
        }
    }

    /// `k_{μ,n}(ζ, ζ)`, cached per ζ.
    pub fn diagonal_at(&self, zeta: Complex64) -> Result<f64> {
        let key = (zeta.re.to_bits(), zeta.im.to_bits());
        if let Some(&v) = self
            .diagonal
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(&key)
        {
            return Ok(v);
        }
        let value = self.cd_kernel(zeta, zeta)?.re;
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::DegenerateKernel { value });
        }
        self.diagonal
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .entry(key)
            .or_insert(value);
        Ok(value)
    }

    /// Compares `k_n(z1, z2) / k_n(ζ, ζ)` with the universal ratio.
    pub fn deviation(
        &self,
        zeta: Complex64,
        z1: Complex64,
        z2: Complex64,
    ) -> Result<DeviationSample> {
        check_unimodular(zeta)?;
        let denom = self.diagonal_at(zeta)?;
        let k = self.cd_kernel(z1, z2)?;
        Ok(DeviationSample::new(self.n, zeta, z1, z2, k / denom))
    }

    /// Same as [`deviation`](Self::deviation) from precomputed point values.
    pub fn deviation_from_points(
        &self,
        zeta: Complex64,
        p1: &PointValues,
        p2: &PointValues,
    ) -> Result<DeviationSample> {
        check_unimodular(zeta)?;
        let denom = self.diagonal_at(zeta)?;
        let k = self.kernel_from_points(p1, p2)?;
        Ok(DeviationSample::new(self.n, zeta, p1.z, p2.z, k / denom))
    }
}

fn check_unimodular(zeta: Complex64) -> Result<()> {
    if (zeta.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "zeta must lie on the unit circle, |zeta| = {}",
            zeta.norm()
        )));
    }
    Ok(())
}

/// One comparison of the kernel ratio against the universal ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationSample {
    pub n: usize,
    pub zeta: Complex64,
    pub z1: Complex64,
    pub z2: Complex64,
    pub ratio: Complex64,
    pub universal: Complex64,
    pub deviation: f64,
}

impl DeviationSample {
    fn new(n: usize, zeta: Complex64, z1: Complex64, z2: Complex64, ratio: Complex64) -> Self {
        let universal = universal_ratio(z1, z2, n);
        Self {
            n,
            zeta,
            z1,
            z2,
            ratio,
            universal,
            deviation: (ratio - universal).norm(),
        }
    }
}

/// `e^s - 1` without cancellation near `s = 0`.
fn expm1_c(s: Complex64) -> Complex64 {
    let half = (0.5 * s.im).sin();
    Complex64::new(
        s.re.exp_m1() * s.im.cos() - 2.0 * half * half,
        s.re.exp() * s.im.sin(),
    )
}

/// `log(1 + d)` accurate for small `d`.
fn ln1p_c(d: Complex64) -> Complex64 {
    Complex64::new(
        0.5 * (2.0 * d.re + d.norm_sqr()).ln_1p(),
        d.im.atan2(1.0 + d.re),
    )
}

/// `(1 - conj(z2)^n z1^n) / (n (1 - conj(z2) z1))`, the Lebesgue kernel ratio.
pub fn universal_ratio(z1: Complex64, z2: Complex64, n: usize) -> Complex64 {
    assert!(n >= 1, "universal ratio needs n >= 1");
    let one = Complex64::new(1.0, 0.0);
    let nf = n as f64;
    // conj(z2) z1 - 1, expanded so that nearby points keep their digits
    let d = (z2.conj() - one) * (z1 - one) + (z2.conj() - one) + (z1 - one);
    if d.norm() < UNIVERSAL_LOG_RADIUS {
        let t = ln1p_c(d);
        if t == Complex64::new(0.0, 0.0) {
            return one;
        }
        return expm1_c(t * nf) / (expm1_c(t) * nf);
    }
    let w = one + d;
    let wn = match i32::try_from(n) {
        Ok(e) => w.powi(e),
        Err(_) => w.powf(nf),
    };
    (one - wn) / (nf * (one - w))
}

/// `(e^{u + conj v} - 1) / (u + conj v)`, equal to 1 where `u + conj v = 0`.
pub fn sine_type_limit(u: Complex64, v: Complex64) -> Complex64 {
    let s = u + v.conj();
    if s == Complex64::new(0.0, 0.0) {
        return Complex64::new(1.0, 0.0);
    }
    expm1_c(s) / s
}
