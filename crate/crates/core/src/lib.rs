//! Orthogonal polynomials on the unit circle and the local behaviour of their
//! Christoffel-Darboux kernels near a point of the circle.
//!
//! The pipeline is weight → trigonometric moments → Verblunsky coefficients
//! (Levinson) → kernels evaluated by the Szegő recursion, together with the
//! entropy `log P[w] - P[log w]` that controls the deviation from the
//! Lebesgue kernel ratio.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod entropy;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod io;
pub mod kernels;
pub mod measures;
pub mod opuc;
pub mod parse;
pub mod quad;
pub mod svg;

pub use entropy::{entropy_at, entropy_profile, fit_entropy_exponent, EntropyProfile, FitModel};
pub use error::{Error, Result};
pub use experiments::{
    figure2_data, poisson_example_check, rate_experiment, theorem1_check, theorem1_sweep, IndexConvention,
    RateConfig, RateRecord, Theorem1Report,
};
pub use kernels::{universal_ratio, KernelContext, KernelStrategy};
pub use measures::{compute_moments, make_weight, normalize_weight, CircleWeight, MomentCache, MomentSequence, WeightSpec};
pub use opuc::{levinson, szego_polynomials, SzegoWalker, VerblunskyCoefficients};

pub use num_complex::Complex64;
