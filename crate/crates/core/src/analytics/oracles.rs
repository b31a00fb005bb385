//! Numerical cross-checks on the closed forms. Each one uses only the CDF
//! or PDF of a [`LinkModel`] together with generic quadrature.

use crate::error::{Context, Error, Result};
use crate::specfun::adaptive_integrate_semi_infinite;

use super::LinkModel;

/// ∫₀^∞ f(γ) dγ with the decay length of the RF hop as the map scale.
fn integrate<F>(model: &LinkModel, mut f: F, what: &str) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut failure: Option<Error> = None;
    let v = adaptive_integrate_semi_infinite(
        |g| {
            if g <= 0.0 {
                return 0.0;
            }
            f(g).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                f64::NAN
            })
        },
        0.0,
        model.params().gbar1,
        model.config(),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    v.context(|| what.to_string())
}

/// dF/dγ by a central difference with one Richardson extrapolation step.
pub fn cdf_derivative(model: &LinkModel, gamma: f64) -> Result<f64> {
    let h = 1e-3 * gamma;
    let diff = |h: f64| -> Result<f64> {
        Ok((model.ccdf(gamma - h)? - model.ccdf(gamma + h)?) / (2.0 * h))
    };
    let coarse = diff(h)?;
    let fine = diff(0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// ∫₀^∞ f(γ) dγ.
pub fn pdf_mass(model: &LinkModel) -> Result<f64> {
    integrate(model, |g| model.pdf(g), "PDF normalization integral")
}

/// ∫₀^∞ e^{−sγ} f(γ) dγ.
pub fn laplace_transform(model: &LinkModel, s: f64) -> Result<f64> {
    integrate(model, |g| Ok((-s * g).exp() * model.pdf(g)?), "Laplace transform of the PDF")
}

/// n ∫₀^∞ γ^{n−1} F^c(γ) dγ.
pub fn moment_from_ccdf(model: &LinkModel, n: u32) -> Result<f64> {
    let v = integrate(
        model,
        |g| Ok(g.powi(n as i32 - 1) * model.ccdf(g)?),
        "CCDF moment integral",
    )?;
    Ok(n as f64 * v)
}
