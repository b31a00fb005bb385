//! Univariate Meijer G function by numerical Mellin–Barnes integration.
//!
//! With the kernel
//!
//! ```text
//!          Π_{j≤m} Γ(b_j + s) Π_{i≤n} Γ(1 − a_i − s)
//! Φ(s) = ---------------------------------------------
//!         Π_{j>m} Γ(1 − b_j − s) Π_{i>n} Γ(a_i + s)
//! ```
//!
//! G^{m,n}_{p,q}(z | a; b) = (1/2πi) ∫ Φ(s) z^{−s} ds along the vertical line
//! Re s = c separating the poles of the b-gammas (left) from those of the
//! a-gammas (right). On that line ds = i dt, so G = (1/2π) ∫ Φ(c+it) z^{−c−it} dt.

use num_complex::Complex64;

use super::gamma::log_gamma_complex;
use super::quad::gauss_kronrod;
use super::series::{meijer_g_series, SeriesPlan};
use super::{QuadratureConfig, Result, SpecfunError};

const INITIAL_TRUNCATION: f64 = 32.0;
const TRUNCATION_CEILING: f64 = 4096.0;
const IMAGINARY_RESIDUE_TOL: f64 = 1e-9;

/// Parameter block of G^{m,n}_{p,q}(z | a; b), with p = a.len(), q = b.len().
///
/// The first `m` entries of `b` and the first `n` entries of `a` enter the
/// numerator of the Mellin–Barnes kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct MeijerGSpec {
    a: Vec<f64>,
    b: Vec<f64>,
    m: usize,
    n: usize,
}

impl MeijerGSpec {
    pub fn new(a: Vec<f64>, b: Vec<f64>, m: usize, n: usize) -> Result<Self> {
        if m > b.len() || n > a.len() {
            return Err(SpecfunError::InvalidSpec(format!(
                "need 0 ≤ m ≤ q and 0 ≤ n ≤ p, got m={m}, n={n}, p={}, q={}",
                a.len(),
                b.len()
            )));
        }
        if let Some(bad) = a.iter().chain(&b).find(|v| !v.is_finite()) {
            return Err(SpecfunError::InvalidSpec(format!("non-finite parameter {bad}")));
        }
        Ok(Self { a, b, m, n })
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }
    pub fn b(&self) -> &[f64] {
        &self.b
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn p(&self) -> usize {
        self.a.len()
    }
    pub fn q(&self) -> usize {
        self.b.len()
    }

    /// Open interval of admissible Re s, before any one-sided bound is made
    /// finite. `left` is −∞ when m = 0, `right` is +∞ when n = 0.
    pub fn raw_contour_interval(&self) -> (f64, f64) {
        let left = self.b[..self.m].iter().map(|b| -b).fold(f64::NEG_INFINITY, f64::max);
        let right = self.a[..self.n].iter().map(|a| 1.0 - a).fold(f64::INFINITY, f64::min);
        (left, right)
    }

    /// Admissible interval with a missing bound placed one unit from the
    /// other; fails when the interval is empty or both bounds are missing.
    pub fn contour_interval(&self) -> Result<(f64, f64)> {
        let (left, right) = self.raw_contour_interval();
        let (left, right) = match (left.is_finite(), right.is_finite()) {
            (true, true) => (left, right),
            (true, false) => (left, left + 1.0),
            (false, true) => (right - 1.0, right),
            (false, false) => (-0.5, 0.5),
        };
        if right - left <= 0.0 {
            return Err(SpecfunError::EmptyContour { left, right });
        }
        Ok((left, right))
    }

    /// Re s of the integration line: midpoint of the admissible interval.
    pub fn contour_abscissa(&self) -> Result<f64> {
        let (left, right) = self.contour_interval()?;
        Ok(0.5 * (left + right))
    }

    /// ln Φ(s). Returns `None` where a denominator gamma has a pole, i.e.
    /// where Φ vanishes.
    pub fn log_kernel(&self, s: Complex64) -> Result<Option<Complex64>> {
        let mut acc = Complex64::new(0.0, 0.0);
        for b in &self.b[..self.m] {
            acc += log_gamma_complex(s + b)?;
        }
        for a in &self.a[..self.n] {
            acc += log_gamma_complex(1.0 - a - s)?;
        }
        for b in &self.b[self.m..] {
            match log_gamma_complex(1.0 - b - s) {
                Ok(v) => acc -= v,
                Err(SpecfunError::GammaPole(_)) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
        for a in &self.a[self.n..] {
            match log_gamma_complex(s + a) {
                Ok(v) => acc -= v,
                Err(SpecfunError::GammaPole(_)) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
        Ok(Some(acc))
    }
}

/// G^{m,n}_{p,q}(z | a; b) for real z > 0 by contour integration.
///
/// The line |Im s| ≤ T is integrated with T = 32, 64, … until the outermost
/// panel [T/2, T] contributes less than `cfg.contour_truncation_tol` of the
/// total; T beyond 4096 is reported as non-convergence.
pub fn meijer_g(spec: &MeijerGSpec, z: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(SpecfunError::Domain { what: "Meijer G argument", value: z });
    }
    let c = spec.contour_abscissa()?;
    let ln_z = z.ln();
    let tol = cfg.contour_truncation_tol;

    let mut failure = None;
    // Both halves of the line are evaluated; for real parameters they are
    // complex conjugates, so the imaginary part of the sum measures any
    // inconsistency in the kernel.
    let mut integrand = |t: f64| -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for s in [Complex64::new(c, t), Complex64::new(c, -t)] {
            match spec.log_kernel(s) {
                Ok(Some(lk)) => sum += (lk - s * ln_z).exp(),
                Ok(None) => {}
                Err(e) => {
                    failure.get_or_insert(e);
                }
            }
        }
        sum
    };

    let mut panel = |lo: f64, hi: f64, abs_tol: f64| -> Result<Complex64> {
        let out = gauss_kronrod(&mut integrand, lo, hi, abs_tol, tol)?;
        Ok(out.value)
    };

    let mut truncation = INITIAL_TRUNCATION;
    let head = panel(0.0, truncation / 2.0, 0.0)?;
    let mut last = panel(truncation / 2.0, truncation, tol * head.norm())?;
    let mut total = head + last;
    while last.norm() > tol * total.norm() {
        if truncation >= TRUNCATION_CEILING {
            return Err(SpecfunError::NotConverged { ceiling: TRUNCATION_CEILING });
        }
        last = panel(truncation, 2.0 * truncation, tol * total.norm())?;
        total += last;
        truncation *= 2.0;
    }
    if let Some(e) = failure {
        return Err(e);
    }

    let value = total / (2.0 * std::f64::consts::PI);
    if value.im.abs() > IMAGINARY_RESIDUE_TOL * value.re.abs().max(f64::MIN_POSITIVE) {
        return Err(SpecfunError::ImaginaryResidue { real: value.re, imag: value.im });
    }
    Ok(value.re)
}

/// Residue series where it applies, contour integration otherwise.
pub fn meijer_g_auto(spec: &MeijerGSpec, z: f64, cfg: &QuadratureConfig) -> Result<f64> {
    meijer_g_series(spec, z).or_else(|_| meijer_g(spec, z, cfg))
}

/// A parameter block prepared for repeated evaluation: the series plan is
/// built once, and every argument it cannot handle goes to the contour.
#[derive(Debug, Clone)]
pub struct MeijerG {
    spec: MeijerGSpec,
    plan: Option<SeriesPlan>,
    cfg: QuadratureConfig,
}

impl MeijerG {
    pub fn new(spec: MeijerGSpec, cfg: QuadratureConfig) -> Self {
        let plan = SeriesPlan::new(&spec).ok();
        Self { spec, plan, cfg }
    }

    pub fn spec(&self) -> &MeijerGSpec {
        &self.spec
    }

    /// Whether the residue series is available for this block.
    pub fn has_series(&self) -> bool {
        self.plan.is_some()
    }

    pub fn eval(&self, z: f64) -> Result<f64> {
        if let Some(plan) = &self.plan {
            if let Ok(v) = plan.eval(z) {
                return Ok(v);
            }
        }
        meijer_g(&self.spec, z, &self.cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn rel(got: f64, want: f64) -> f64 {
        ((got - want) / want).abs()
    }

    #[test]
    fn spec_validation() {
        assert!(MeijerGSpec::new(vec![], vec![0.0], 2, 0).is_err());
        assert!(MeijerGSpec::new(vec![1.0], vec![], 0, 2).is_err());
        assert!(MeijerGSpec::new(vec![f64::NAN], vec![0.0], 1, 0).is_err());
        assert!(MeijerGSpec::new(vec![], vec![0.0], 1, 0).is_ok());
    }

    #[test]
    fn contour_placement() {
        let s = MeijerGSpec::new(vec![], vec![0.0], 1, 0).unwrap();
        assert_eq!(s.contour_interval().unwrap(), (0.0, 1.0));
        assert_eq!(s.contour_abscissa().unwrap(), 0.5);
        let s = MeijerGSpec::new(vec![1.0], vec![], 0, 1).unwrap();
        assert_eq!(s.contour_interval().unwrap(), (-1.0, 0.0));
        let s = MeijerGSpec::new(vec![0.5], vec![0.0], 1, 1).unwrap();
        assert_eq!(s.contour_abscissa().unwrap(), 0.25);
    }

    #[test]
    fn empty_contour_rejected() {
        // b = 0 puts a pole at 0, a = 1.5 puts one at −0.5: no separating line.
        let s = MeijerGSpec::new(vec![1.5], vec![0.0], 1, 1).unwrap();
        assert!(matches!(meijer_g(&s, 1.0, &cfg()), Err(SpecfunError::EmptyContour { .. })));
    }

    #[test]
    fn rejects_nonpositive_argument() {
        let s = MeijerGSpec::new(vec![], vec![0.0], 1, 0).unwrap();
        assert!(meijer_g(&s, 0.0, &cfg()).is_err());
        assert!(meijer_g(&s, -1.0, &cfg()).is_err());
    }

    #[test]
    fn exponential_identity() {
        let s = MeijerGSpec::new(vec![], vec![0.0], 1, 0).unwrap();
        let v = meijer_g(&s, 1.0, &cfg()).unwrap();
        assert!(rel(v, (-1.0f64).exp()) < 1e-12, "{v}");
    }

    #[test]
    fn algebraic_identity_b_one() {
        let s = MeijerGSpec::new(vec![0.0], vec![0.0], 1, 1).unwrap();
        let v = meijer_g(&s, 1.0, &cfg()).unwrap();
        assert!(rel(v, 0.5) < 1e-12, "{v}");
    }

    #[test]
    fn not_converged_when_kernel_does_not_decay() {
        // G^{1,0}_{1,1} has a non-decaying kernel on the line.
        let s = MeijerGSpec::new(vec![1.5], vec![0.0], 1, 0).unwrap();
        let r = meijer_g(&s, 0.5, &cfg());
        assert!(r.is_err(), "{r:?}");
    }

    #[test]
    fn tighter_truncation_is_stable() {
        let s = MeijerGSpec::new(vec![2.0], vec![0.5, 1.05, 1.55, 1.75, 2.25, 0.0], 6, 0).unwrap();
        let loose = meijer_g(&s, 0.37, &cfg()).unwrap();
        let tight_cfg = QuadratureConfig { contour_truncation_tol: 0.5e-12, ..cfg() };
        let tight = meijer_g(&s, 0.37, &tight_cfg).unwrap();
        assert!(rel(tight, loose) < 1e-12);
    }

    #[test]
    fn identity_battery() {
        let exp = MeijerGSpec::new(vec![], vec![0.0], 1, 0).unwrap();
        let inv_exp = MeijerGSpec::new(vec![1.0], vec![], 0, 1).unwrap();
        for z in [0.1, 1.0, 10.0] {
            assert!(rel(meijer_g(&exp, z, &cfg()).unwrap(), (-z).exp()) < 1e-10, "z = {z}");
            assert!(rel(meijer_g(&inv_exp, z, &cfg()).unwrap(), (-1.0 / z).exp()) < 1e-10);
            for b in [0.5, 1.0, 2.5] {
                let s = MeijerGSpec::new(vec![1.0 - b], vec![0.0], 1, 1).unwrap();
                let want = crate::specfun::ln_gamma(b).unwrap().exp() * (1.0 + z).powf(-b);
                let got = meijer_g(&s, z, &cfg()).unwrap();
                assert!(rel(got, want) < 1e-10, "z = {z}, b = {b}: {got} vs {want}");
            }
        }
    }

    /// Trapezoid rule on a fixed grid over |t| ≤ 2·32·2, 4× denser than the
    /// finest spacing that matters for these kernels.
    fn fixed_grid_oracle(spec: &MeijerGSpec, z: f64) -> f64 {
        let c = spec.contour_abscissa().unwrap();
        let (half_width, h) = (128.0, 1.0 / 64.0);
        let steps = (half_width / h) as i64;
        let mut sum = 0.0;
        for k in -steps..=steps {
            let s = Complex64::new(c, k as f64 * h);
            if let Some(lk) = spec.log_kernel(s).unwrap() {
                sum += (lk - s * z.ln()).exp().re;
            }
        }
        sum * h / (2.0 * std::f64::consts::PI)
    }

    #[test]
    fn matches_oversampled_fixed_grid_oracle() {
        // CDF kernel for α = 2.1, β = 3.5, ξ = 1.
        let s = MeijerGSpec::new(vec![1.5], vec![0.5, 1.05, 1.55, 1.75, 2.25, 0.0], 6, 0).unwrap();
        let want = fixed_grid_oracle(&s, 0.37);
        assert!(rel(meijer_g(&s, 0.37, &cfg()).unwrap(), want) < 1e-11);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]
        #[test]
        fn series_agrees_with_contour(
            alpha in 1.1f64..8.0, beta in 1.1f64..8.0, xi in 0.6f64..3.0,
            a0 in -1.0f64..0.5, z in 0.01f64..3.0, upper in proptest::bool::ANY,
        ) {
            let h = 0.5 * xi * xi;
            let b = vec![h, alpha / 2.0, (alpha + 1.0) / 2.0, beta / 2.0, (beta + 1.0) / 2.0, 0.0];
            let (a, n) = if upper { (vec![a0, h + 1.0], 1) } else { (vec![h + 1.0], 0) };
            let s = MeijerGSpec::new(a, b, 6, n).unwrap();
            if let Ok(series) = meijer_g_series(&s, z) {
                let contour = meijer_g(&s, z, &cfg()).unwrap();
                proptest::prop_assert!(rel(series, contour) < 1e-9, "{series} vs {contour}");
            }
        }
    }
}
