//! Upper incomplete gamma function Γ(a, x) = ∫ₓ^∞ t^{a−1} e^{−t} dt.

use super::gamma::ln_gamma;
use super::{Result, SpecfunError};

const MAX_ITER: usize = 500;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// Γ(a, x) for a > 0, x ≥ 0.
pub fn upper_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    let q = regularized_upper_gamma(a, x)?;
    Ok(q * ln_gamma(a)?.exp())
}

/// Q(a, x) = Γ(a, x) / Γ(a).
pub fn regularized_upper_gamma(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(SpecfunError::Domain { what: "incomplete gamma shape a", value: a });
    }
    if !(x >= 0.0) {
        return Err(SpecfunError::Domain { what: "incomplete gamma argument x", value: x });
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let log_prefactor = a * x.ln() - x - ln_gamma(a)?;
    if x < a + 1.0 {
        Ok(1.0 - lower_series(a, x, log_prefactor)?)
    } else {
        Ok(upper_fraction(a, x)? * log_prefactor.exp())
    }
}

/// P(a, x) by its power series.
fn lower_series(a: f64, x: f64, log_prefactor: f64) -> Result<f64> {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            return Ok(sum * log_prefactor.exp());
        }
    }
    Err(SpecfunError::ToleranceNotMet { estimate: sum * log_prefactor.exp(), error: term.abs() })
}

/// Continued fraction for Γ(a, x) e^{x} x^{−a}, modified Lentz.
fn upper_fraction(a: f64, x: f64) -> Result<f64> {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(SpecfunError::ToleranceNotMet { estimate: h, error: f64::NAN })
}
