//! Verblunsky coefficients and orthonormal polynomials on the unit circle.
//!
//! The Szegő recursion used throughout is
//!
//! ```text
//! φ_{k+1}(z)  = (z φ_k(z) - conj(a_k) φ_k*(z)) / ρ_k
//! φ_{k+1}*(z) = (φ_k*(z) - a_k z φ_k(z)) / ρ_k,      ρ_k = sqrt(1 - |a_k|²)
//! ```
//!
//! starting from `φ_0 = φ_0* = κ_0 = c_0^{-1/2}`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measures::MomentSequence;

/// Coefficients with `|a_k| >= 1 - DEGENERACY_MARGIN` abort the recursion.
pub const DEGENERACY_MARGIN: f64 = 1e-13;

/// Largest degree for which [`szego_polynomials`] materializes coefficient
/// vectors. Larger degrees go through [`SzegoWalker`].
pub const MAX_MATERIALIZED_DEGREE: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct VerblunskyCoefficients {
    coefficients: Vec<Complex64>,
    /// ρ_k = sqrt(1 - |a_k|²)
    complements: Vec<f64>,
    norms: Vec<f64>,
    residual: f64,
}

impl VerblunskyCoefficients {
    /// Builds the coefficient set from `a_0 .. a_{n-1}` and `κ_0`.
    pub fn new(coefficients: Vec<Complex64>, kappa0: f64) -> Result<Self> {
        if !(kappa0 > 0.0) || !kappa0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "kappa_0 must be positive, got {kappa0}"
            )));
        }
        let mut complements = Vec::with_capacity(coefficients.len());
        let mut norms = Vec::with_capacity(coefficients.len() + 1);
        norms.push(kappa0);
        for (k, a) in coefficients.iter().enumerate() {
            let modulus = a.norm();
            if !(modulus < 1.0 - DEGENERACY_MARGIN) {
                return Err(Error::NotPositiveDefinite { k, modulus });
            }
            let rho = ((1.0 - modulus) * (1.0 + modulus)).sqrt();
            complements.push(rho);
            norms.push(norms[k] / rho);
        }
        Ok(Self {
            coefficients,
            complements,
            norms,
            residual: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Leading coefficients κ_0 .. κ_n of φ_0 .. φ_n.
    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn complement(&self, k: usize) -> f64 {
        self.complements[k]
    }

    /// Relative Toeplitz residual `‖T x - e‖_∞` of the last polynomial
    /// produced by [`levinson`]; zero when built from given coefficients.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// The first `n` coefficients.
    pub fn truncated(&self, n: usize) -> Self {
        let n = n.min(self.len());
        Self {
            coefficients: self.coefficients[..n].to_vec(),
            complements: self.complements[..n].to_vec(),
            norms: self.norms[..=n].to_vec(),
            residual: self.residual,
        }
    }
}

/// Levinson recursion on the Hermitian Toeplitz matrix of `m`.
///
/// With `n` moments it yields `a_0 .. a_{n-2}` and `κ_0 .. κ_{n-1}`.
pub fn levinson(m: &MomentSequence) -> Result<VerblunskyCoefficients> {
    let n = m.len();
    if n == 0 {
        return Err(Error::InvalidParameter("empty moment sequence".into()));
    }
    let c = m.values();
    let c0 = c[0].re;
    if !(c0 > 0.0) || !c0.is_finite() {
        return Err(Error::NotPositiveDefinite {
            k: 0,
            modulus: f64::INFINITY,
        });
    }

    // monic Φ_k, coefficient of z^i at index i
    let mut monic = Vec::with_capacity(n);
    monic.push(Complex64::new(1.0, 0.0));
    let mut scratch = Vec::with_capacity(n);
    let mut norm2 = c0;
    let mut coefficients = Vec::with_capacity(n.saturating_sub(1));

    for k in 0..n - 1 {
        // <z Φ_k, 1> = Σ_i p_i conj(c_{i+1})
        let inner: Complex64 = monic
            .iter()
            .zip(&c[1..=k + 1])
            .map(|(p, ci)| p * ci.conj())
            .sum();
        let a = (inner / norm2).conj();
        let modulus = a.norm();
        if !modulus.is_finite() {
            return Err(Error::NumericalBreakdown { k });
        }
        if !(modulus < 1.0 - DEGENERACY_MARGIN) {
            return Err(Error::NotPositiveDefinite { k, modulus });
        }

        // Φ_{k+1} = z Φ_k - conj(a) Φ_k*,  Φ_k*[i] = conj(Φ_k[k - i])
        scratch.clear();
        scratch.extend_from_slice(&monic);
        monic.push(Complex64::new(0.0, 0.0));
        for i in (1..=k + 1).rev() {
            monic[i] = monic[i - 1];
        }
        monic[0] = Complex64::new(0.0, 0.0);
        let abar = a.conj();
        for i in 0..=k {
            monic[i] -= abar * scratch[k - i].conj();
        }

        norm2 *= (1.0 - modulus) * (1.0 + modulus);
        if !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(Error::NumericalBreakdown { k });
        }
        coefficients.push(a);
    }

    let mut v = VerblunskyCoefficients::new(coefficients, c0.powf(-0.5))?;
    v.residual = toeplitz_residual(m, &monic, norm2);
    Ok(v)
}

/// max_j |Σ_i c_{j-i} Φ_i - δ_{j,deg} ‖Φ‖²| / ‖Φ‖², i.e. the residual of
/// `T x = e_n` with `x = Φ / ‖Φ‖²`.
fn toeplitz_residual(m: &MomentSequence, monic: &[Complex64], norm2: f64) -> f64 {
    let deg = monic.len() - 1;
    let mut worst: f64 = 0.0;
    for j in 0..=deg {
        let mut r: Complex64 = monic
            .iter()
            .enumerate()
            .map(|(i, p)| m.get(j as isize - i as isize) * p)
            .sum();
        if j == deg {
            r -= norm2;
        }
        worst = worst.max(r.norm() / norm2);
    }
    worst
}

/// Horner evaluation of `Σ p_k z^k`.
pub fn eval_poly(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// `p*(z) = z^n conj(p(1/conj z))` for the declared degree `n`: the
/// coefficients reversed and conjugated, padded to length `n + 1`.
///
/// # Panics
///
/// If `p` has a nonzero coefficient above degree `n`.
pub fn reflect(p: &[Complex64], degree: usize) -> Vec<Complex64> {
    assert!(
        p.iter().skip(degree + 1).all(|c| *c == Complex64::new(0.0, 0.0)),
        "polynomial has nonzero coefficients above the declared degree {degree}"
    );
    (0..=degree)
        .map(|k| p.get(degree - k).copied().unwrap_or_default().conj())
        .collect()
}

/// Orthonormal polynomials φ_0 .. φ_n and the reflected φ_n*.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialPair {
    phi: Vec<Vec<Complex64>>,
    phi_star: Vec<Complex64>,
}

impl PolynomialPair {
    pub fn degree(&self) -> usize {
        self.phi.len() - 1
    }

    /// Coefficients of φ_k in the monomial basis, length `k + 1`.
    pub fn phi(&self, k: usize) -> &[Complex64] {
        &self.phi[k]
    }

    pub fn phi_n(&self) -> &[Complex64] {
        &self.phi[self.degree()]
    }

    pub fn phi_star_n(&self) -> &[Complex64] {
        &self.phi_star
    }

    pub fn all(&self) -> &[Vec<Complex64>] {
        &self.phi
    }
}

/// Materializes φ_0 .. φ_n by running the recursion on coefficient vectors.
pub fn szego_polynomials(v: &VerblunskyCoefficients, n: usize) -> Result<PolynomialPair> {
    if n > v.len() {
        return Err(Error::InvalidParameter(format!(
            "degree {n} needs {n} Verblunsky coefficients, only {} available",
            v.len()
        )));
    }
    if n > MAX_MATERIALIZED_DEGREE {
        return Err(Error::InvalidParameter(format!(
            "degree {n} exceeds the materialization limit {MAX_MATERIALIZED_DEGREE}"
        )));
    }
    let kappa0 = Complex64::new(v.norms()[0], 0.0);
    let mut phi = Vec::with_capacity(n + 1);
    phi.push(vec![kappa0]);
    let mut star = vec![kappa0];
    for k in 0..n {
        let a = v.coefficients()[k];
        let rho = v.complement(k);
        let prev = &phi[k];
        let mut next = vec![Complex64::new(0.0, 0.0); k + 2];
        let mut next_star = vec![Complex64::new(0.0, 0.0); k + 2];
        for i in 0..=k {
            next[i + 1] += prev[i];
            next[i] -= a.conj() * star[i];
            next_star[i] += star[i];
            next_star[i + 1] -= a * prev[i];
        }
        for c in next.iter_mut().chain(next_star.iter_mut()) {
            *c /= rho;
        }
        phi.push(next);
        star = next_star;
    }
    Ok(PolynomialPair {
        phi,
        phi_star: star,
    })
}

/// Runs the Szegő recursion at a single point, carrying φ_k(z) and φ_k*(z).
#[derive(Debug, Clone, Copy)]
pub struct SzegoWalker {
    z: Complex64,
    degree: usize,
    phi: Complex64,
    phi_star: Complex64,
}

impl SzegoWalker {
    pub fn new(v: &VerblunskyCoefficients, z: Complex64) -> Self {
        let kappa0 = Complex64::new(v.norms()[0], 0.0);
        Self {
            z,
            degree: 0,
            phi: kappa0,
            phi_star: kappa0,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn phi(&self) -> Complex64 {
        self.phi
    }

    pub fn phi_star(&self) -> Complex64 {
        self.phi_star
    }

    /// Advances from degree k to k + 1 using `a_k`.
    #[inline]
    pub fn step(&mut self, v: &VerblunskyCoefficients) {
        let k = self.degree;
        self.apply(v.coefficients()[k], 1.0 / v.complement(k));
    }

    /// Advances one degree with an arbitrary `a` in the open disk in place of
    /// the true coefficient, producing the modified pair φ̃, φ̃*.
    pub fn step_with(&mut self, a: Complex64) {
        let modulus = a.norm();
        self.apply(a, 1.0 / ((1.0 - modulus) * (1.0 + modulus)).sqrt());
    }

    #[inline]
    fn apply(&mut self, a: Complex64, inv: f64) {
        let k = self.degree;
        let zphi = self.z * self.phi;
        let next = (zphi - a.conj() * self.phi_star) * inv;
        let next_star = (self.phi_star - a * zphi) * inv;
        self.phi = next;
        self.phi_star = next_star;
        self.degree = k + 1;
    }
}
