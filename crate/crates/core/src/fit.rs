//! Ordinary least squares on log-log data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `y ≈ intercept + slope · x` by ordinary least squares.
pub fn least_squares_line(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "line fit needs two or more paired points, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidParameter("line fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// `value ≈ constant · scale^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub constant: f64,
    /// max_i |prediction_i / value_i - 1|
    pub max_rel_residual: f64,
}

impl PowerFit {
    pub fn predict(&self, scale: f64) -> f64 {
        self.constant * scale.powf(self.exponent)
    }
}

/// Fits `values ≈ C · scales^β` in log-log coordinates. Inputs must be positive.
pub fn power_law(scales: &[f64], values: &[f64]) -> Result<PowerFit> {
    if scales.iter().chain(values).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "power-law fit needs positive finite data".into(),
        ));
    }
    let lx: Vec<f64> = scales.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let (slope, intercept) = least_squares_line(&lx, &ly)?;
    let fit = PowerFit {
        exponent: slope,
        constant: intercept.exp(),
        max_rel_residual: 0.0,
    };
    let residual = scales
        .iter()
        .zip(values)
        .map(|(s, v)| (fit.predict(*s) / v - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(PowerFit {
        max_rel_residual: residual,
        ..fit
    })
}
