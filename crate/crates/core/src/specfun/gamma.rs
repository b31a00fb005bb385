//! Complex log-gamma.
//!
//! Stirling's asymptotic series on |z| ≥ 10 with Re z ≥ 0, and the upward
//! recurrence ln Γ(z) = ln Γ(z + N) − Σ ln(z + k) everywhere else. Summing
//! principal logarithms keeps the result on the principal branch, i.e. the
//! continuation of the real ln Γ that is analytic off (−∞, 0].

use num_complex::Complex64;

use super::{Result, SpecfunError};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

const STIRLING_RADIUS: f64 = 10.0;

/// B_{2k} / (2k (2k − 1)) for k = 1..=10.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

/// Principal branch of ln Γ(z).
///
/// Fails with [`SpecfunError::GammaPole`] when z lies within 1e−12 of a
/// non-positive integer.
pub fn log_gamma_complex(z: Complex64) -> Result<Complex64> {
    if z.re <= 0.5 && z.im.abs() < 1e-12 {
        let nearest = z.re.round();
        if nearest <= 0.0 && (z.re - nearest).abs() < 1e-12 {
            return Err(SpecfunError::GammaPole(z));
        }
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(SpecfunError::Domain {
            what: "log-gamma argument",
            value: if z.re.is_finite() { z.im } else { z.re },
        });
    }

    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.re < 0.0 || w.norm_sqr() < STIRLING_RADIUS * STIRLING_RADIUS {
        // Exactly on the negative axis the limit from above is taken.
        shift += if w.im == 0.0 && w.re < 0.0 {
            Complex64::new((-w.re).ln(), std::f64::consts::PI)
        } else {
            w.ln()
        };
        w += 1.0;
    }
    Ok(stirling(w) - shift)
}

fn stirling(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut acc = Complex64::new(0.0, 0.0);
    for c in STIRLING.iter().rev() {
        acc = acc * inv2 + c;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + acc * inv
}

/// ln |Γ(x)| for real x that is not a pole.
pub fn ln_gamma(x: f64) -> Result<f64> {
    log_gamma_complex(Complex64::new(x, 0.0)).map(|v| v.re)
}
