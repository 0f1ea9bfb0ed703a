//! Independent dense-matrix route used to cross-check the recursions.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use opuc_core::MomentSequence;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `T[j][k] = c_{j-k}` of size `size`.
pub fn toeplitz(m: &MomentSequence, size: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(size, size, |j, k| m.get(j as isize - k as isize))
}

/// Solution of `T x = e_last` with `T` of size `size`; proportional to the
/// monic orthogonal polynomial of degree `size - 1`.
pub fn solve_last_column(m: &MomentSequence, size: usize) -> Vec<Complex64> {
    let t = toeplitz(m, size);
    let mut e = DVector::from_element(size, c(0.0, 0.0));
    e[size - 1] = c(1.0, 0.0);
    let x = t.lu().solve(&e).expect("Toeplitz matrix is singular");
    x.iter().copied().collect()
}

/// Orthonormal φ_degree by the dense solve: `x / sqrt(x_last)`.
pub fn dense_orthonormal(m: &MomentSequence, degree: usize) -> Vec<Complex64> {
    let x = solve_last_column(m, degree + 1);
    let lead = x[degree].re.sqrt();
    x.iter().map(|v| v / lead).collect()
}

/// `∫ p conj(q) w dm` from the moments.
pub fn inner(m: &MomentSequence, p: &[Complex64], q: &[Complex64]) -> Complex64 {
    let mut acc = c(0.0, 0.0);
    for (i, pi) in p.iter().enumerate() {
        for (j, qj) in q.iter().enumerate() {
            acc += pi * qj.conj() * m.get(j as isize - i as isize);
        }
    }
    acc
}

pub fn horner(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter().rev().fold(c(0.0, 0.0), |acc, a| acc * z + a)
}
