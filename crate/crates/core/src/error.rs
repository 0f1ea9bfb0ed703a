use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("weight normalization failed: mass {mass} (error estimate {error_estimate:e})")]
    NormalizationFailure { mass: f64, error_estimate: f64 },

    #[error("weight is not integrable: mass {mass}")]
    NonIntegrable { mass: f64 },

    #[error(
        "quadrature did not converge{}: error estimate {error_estimate:e} exceeds target {target:e}",
        worst_index.map(|j| format!(" (worst moment j = {j})")).unwrap_or_default()
    )]
    QuadratureNonconvergence {
        worst_index: Option<usize>,
        error_estimate: f64,
        target: f64,
    },

    #[error("moment sequence is not positive definite: |a_{k}| = {modulus}")]
    NotPositiveDefinite { k: usize, modulus: f64 },

    #[error("numerical breakdown in the Szego recursion at step {k}")]
    NumericalBreakdown { k: usize },

    #[error("point modulus {modulus} exceeds the supported radius {limit}")]
    OutsideSupportedRegion { modulus: f64, limit: f64 },

    #[error("degenerate kernel: k(zeta, zeta) = {value}")]
    DegenerateKernel { value: f64 },

    #[error("negative entropy {value:e}: log P[w] = {log_poisson_mass}, P[log w] = {poisson_log}")]
    NegativeEntropy {
        value: f64,
        log_poisson_mass: f64,
        poisson_log: f64,
    },

    #[error("insufficient span for fit: {points} points over {decades:.3} decades")]
    InsufficientSpan { points: usize, decades: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
