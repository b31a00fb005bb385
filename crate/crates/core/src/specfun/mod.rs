//! Special-function engine.
//!
//! Everything the link analysis needs from special-function theory lives
//! here: complex log-gamma, the upper incomplete gamma function, the
//! univariate Meijer G function (numerical Mellin–Barnes contour plus a
//! residue-series fast path), the extended generalized bivariate Meijer G
//! function, and the quadrature rules used throughout the crate.
//!
//! All functions are pure; none of them keep state between calls.

mod bivariate;
mod gamma;
mod incgamma;
mod meijer;
mod quad;
mod series;

pub use bivariate::{egbmgf, EgbmgfSpec};
pub use gamma::{ln_gamma, log_gamma_complex};
pub use incgamma::{regularized_upper_gamma, upper_incomplete_gamma};
pub use meijer::{meijer_g, meijer_g_auto, MeijerG, MeijerGSpec};
pub use quad::{
    adaptive_integrate, adaptive_integrate_semi_infinite, gcq_integrate, gcq_rule,
    GcqEstimate, GcqRule, QuadratureConfig,
};
pub use series::{meijer_g_series, SeriesPlan};

use num_complex::Complex64;

/// Errors raised by the special-function engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecfunError {
    #[error("gamma function pole at z = {0}")]
    GammaPole(Complex64),

    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid Meijer G parameters: {0}")]
    InvalidSpec(String),

    #[error("empty contour interval ({left}, {right})")]
    EmptyContour { left: f64, right: f64 },

    #[error("contour integral did not converge before truncation ceiling T = {ceiling}")]
    NotConverged { ceiling: f64 },

    #[error("contour result has imaginary residue {imag:e} against real part {real:e}")]
    ImaginaryResidue { real: f64, imag: f64 },

    #[error("lower parameters b[{i}] and b[{j}] differ by an integer (gap {gap:e})")]
    CoincidentPoles { i: usize, j: usize, gap: f64 },

    #[error("residue series not usable: {0}")]
    SeriesDivergence(String),

    #[error("bivariate quadrature exceeded its cost ceiling ({nodes} nodes)")]
    CostCeiling { nodes: usize },

    #[error("integrand is not finite at x = {at}")]
    NonFiniteIntegrand { at: f64 },

    #[error("quadrature tolerance not met: estimate {estimate:e}, error bound {error:e}")]
    ToleranceNotMet { estimate: f64, error: f64 },
}

pub type Result<T> = std::result::Result<T, SpecfunError>;
