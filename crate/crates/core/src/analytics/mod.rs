//! Closed-form statistics and performance metrics of the end-to-end SNR.
//!
//! With finite ξ every quantity is a Meijer G function of the parameter
//! lists κ₁ = ξ²/2 + 1 and κ₂ = (ξ²/2, α/2, (α+1)/2, β/2, (β+1)/2, 0) with
//! prefactor A₁; without pointing errors the ξ²/2 pair drops out, leaving
//! κ₃ = (α/2, (α+1)/2, β/2, (β+1)/2, 0) and prefactor A₂.
//!
//! All SNR arguments are linear.

pub mod oracles;

use std::cell::RefCell;
use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;

use crate::channel::{DerivedConstants, LinkParams, ModulationSpec};
use crate::error::{invalid, Context, Result};
use crate::specfun::{
    adaptive_integrate, adaptive_integrate_semi_infinite, egbmgf, gcq_integrate, ln_gamma,
    EgbmgfSpec, MeijerG, MeijerGSpec, QuadratureConfig,
};

/// Relative node-doubling change above which an SER integral is redone
/// adaptively.
pub const GCQ_ESCALATION_TOL: f64 = 1e-5;

const CDF_CLAMP_TOL: f64 = 1e-9;
const PDF_CLAMP_TOL: f64 = 1e-10;

/// How the finite-range SER integrals are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SerMethod {
    Gcq,
    Adaptive,
}

/// SER value together with the quadrature that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerEstimate {
    pub value: f64,
    pub method: SerMethod,
    /// |GCQ(2N) − GCQ(N)| when GCQ was attempted.
    pub gcq_change: Option<f64>,
}

/// Closed forms for one link, with the Meijer G blocks prepared once.
#[derive(Debug, Clone)]
pub struct LinkModel {
    params: LinkParams,
    derived: DerivedConstants,
    cfg: QuadratureConfig,
    /// A₁ for finite ξ, A₂ otherwise.
    prefactor: f64,
    /// G^{6,0}_{1,6}(· | κ₁; κ₂), or G^{5,0}_{0,5}(· | ∅; κ₃).
    ccdf_g: MeijerG,
    /// G^{5,0}_{0,5}(· | ∅; κ₃), or G^{5,0}_{0,5}(· | ∅; κ₄).
    pdf_g: MeijerG,
    /// The CCDF block with one more upper parameter equal to 0.
    mgf_g: MeijerG,
}

impl LinkModel {
    pub fn new(params: LinkParams) -> Result<Self> {
        Self::with_config(params, QuadratureConfig::default())
    }

    pub fn with_config(params: LinkParams, cfg: QuadratureConfig) -> Result<Self> {
        params.validate()?;
        cfg.validate().context(|| "quadrature configuration".into())?;
        let derived = params.derived();
        let block = |a: Vec<f64>, b: Vec<f64>, n: usize| -> Result<MeijerG> {
            let m = b.len();
            let spec = MeijerGSpec::new(a, b, m, n).context(|| "link parameter block".into())?;
            Ok(MeijerG::new(spec, cfg))
        };
        let (prefactor, ccdf_g, pdf_g) = match (derived.a1, derived.kappa1, derived.kappa2) {
            (Some(a1), Some(k1), Some(k2)) => (
                a1,
                block(vec![k1], k2.to_vec(), 0)?,
                block(vec![], derived.kappa3.to_vec(), 0)?,
            ),
            _ => (
                derived.a2,
                block(vec![], derived.kappa3.to_vec(), 0)?,
                block(vec![], derived.kappa4.to_vec(), 0)?,
            ),
        };
        let mgf_g = upper_block(&ccdf_g, 0.0, cfg)?;
        Ok(Self { params, derived, cfg, prefactor, ccdf_g, pdf_g, mgf_g })
    }

    pub fn params(&self) -> &LinkParams {
        &self.params
    }

    pub fn derived(&self) -> &DerivedConstants {
        &self.derived
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.cfg
    }

    fn eval(&self, g: &MeijerG, z: f64, what: &str) -> Result<f64> {
        g.eval(z).context(|| format!("{what} at argument {z} for {:?}", self.params))
    }

    /// Complementary CDF, computed directly rather than as 1 − F.
    pub fn ccdf(&self, gamma: f64) -> Result<f64> {
        if !(gamma >= 0.0) {
            return Err(invalid(format!("SNR threshold must be >= 0, got {gamma}")));
        }
        if gamma == 0.0 {
            return Ok(1.0);
        }
        if gamma.is_infinite() {
            return Ok(0.0);
        }
        let g1 = self.params.gbar1;
        let decay = (-gamma / g1).exp();
        if decay == 0.0 {
            return Ok(0.0);
        }
        let z = self.derived.b_const * gamma / g1;
        Ok(self.prefactor * decay * self.eval(&self.ccdf_g, z, "CDF kernel")?)
    }

    /// CDF of the end-to-end SNR, clamped to [0, 1].
    pub fn cdf(&self, gamma: f64) -> Result<f64> {
        let raw = 1.0 - self.ccdf(gamma)?;
        if !(-CDF_CLAMP_TOL..=1.0 + CDF_CLAMP_TOL).contains(&raw) {
            log::warn!("CDF at γ = {gamma} left [0, 1]: raw value {raw:e}");
        }
        Ok(raw.clamp(0.0, 1.0))
    }

    /// Density of the end-to-end SNR at γ > 0.
    pub fn pdf(&self, gamma: f64) -> Result<f64> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(invalid(format!("PDF needs a positive finite SNR, got {gamma}")));
        }
        let g1 = self.params.gbar1;
        let decay = (-gamma / g1).exp();
        if decay == 0.0 {
            return Ok(0.0);
        }
        let b = self.derived.b_const;
        let z = b * gamma / g1;
        let aux = self.eval(&self.pdf_g, z, "PDF kernel")?;
        let main = self.eval(&self.ccdf_g, z, "CDF kernel")?;
        let raw = if self.params.has_pointing_error() {
            let xi2 = self.params.xi * self.params.xi;
            self.prefactor * decay / (2.0 * gamma * g1)
                * (2.0 * g1 * aux + (2.0 * gamma - xi2 * g1) * main)
        } else {
            self.prefactor * decay / g1 * (main + b * aux)
        };
        if raw < -PDF_CLAMP_TOL {
            log::warn!("PDF at γ = {gamma} is negative: {raw:e}");
        }
        Ok(raw.max(0.0))
    }

    /// M(s) = E[e^{−sγ}].
    pub fn mgf(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(invalid(format!("MGF point must be >= 0, got {s}")));
        }
        if s == 0.0 {
            return Ok(1.0);
        }
        let g1 = self.params.gbar1;
        if s.is_infinite() {
            return Ok(0.0);
        }
        let z = self.derived.b_const / (s * g1 + 1.0);
        let g = self.eval(&self.mgf_g, z, "MGF kernel")?;
        Ok(1.0 - s * self.prefactor / (s + 1.0 / g1) * g)
    }

    fn moment_kernel(&self, n: u32) -> Result<f64> {
        let z = self.derived.b_const;
        if n == 1 {
            return self.eval(&self.mgf_g, z, "moment kernel");
        }
        self.eval(&upper_block(&self.ccdf_g, 1.0 - n as f64, self.cfg)?, z, "moment kernel")
    }

    /// E[γⁿ].
    pub fn moment(&self, n: u32) -> Result<f64> {
        if n == 0 {
            return Err(invalid("moment order must be >= 1"));
        }
        let g = self.moment_kernel(n)?;
        Ok(n as f64 * self.prefactor * self.params.gbar1.powi(n as i32) * g)
    }

    /// n-th order amount of fading E[γⁿ]/E[γ]ⁿ − 1.
    pub fn af(&self, n: u32) -> Result<f64> {
        if n == 0 {
            return Err(invalid("amount-of-fading order must be >= 1"));
        }
        let g1 = self.moment_kernel(1)?;
        let gn = if n == 1 { g1 } else { self.moment_kernel(n)? };
        let e = 1 - n as i32;
        Ok(n as f64 * self.prefactor.powi(e) * gn / g1.powi(n as i32) - 1.0)
    }

    /// Average BER of a binary scheme with conditional error Γ(p, qγ)/(2Γ(p)).
    pub fn avg_ber(&self, p: f64, q: f64) -> Result<f64> {
        ModulationSpec::binary(p, q)?;
        let g1 = self.params.gbar1;
        let z = self.derived.b_const / (q * g1 + 1.0);
        let g = self.eval(&upper_block(&self.ccdf_g, 1.0 - p, self.cfg)?, z, "BER kernel")?;
        let ln_scale = self.prefactor.ln() + p * q.ln()
            - ln_gamma(p).expect("p > 0")
            - p * (q + 1.0 / g1).ln();
        Ok(0.5 - 0.5 * ln_scale.exp() * g)
    }

    /// Average BER of a binary [`ModulationSpec`].
    pub fn avg_ber_binary(&self, m: ModulationSpec) -> Result<f64> {
        match m {
            ModulationSpec::Binary { p, q } => self.avg_ber(p, q),
            other => Err(invalid(format!("{other} is not a binary modulation"))),
        }
    }

    /// Average SER, by GCQ with automatic escalation to adaptive quadrature.
    pub fn avg_ser(&self, m: ModulationSpec) -> Result<f64> {
        Ok(self.avg_ser_with(m, SerMethod::Gcq)?.value)
    }

    pub fn avg_ser_mpsk(&self, m_order: u32) -> Result<f64> {
        self.avg_ser(ModulationSpec::mpsk(m_order)?)
    }

    pub fn avg_ser_mam(&self, m_order: u32) -> Result<f64> {
        self.avg_ser(ModulationSpec::mam(m_order)?)
    }

    pub fn avg_ser_mqam(&self, m_order: u32) -> Result<f64> {
        self.avg_ser(ModulationSpec::mqam(m_order)?)
    }

    /// Average SER with an explicit quadrature choice. Binary schemes go to
    /// [`avg_ber`](Self::avg_ber). Requesting GCQ still escalates to
    /// adaptive quadrature when doubling the nodes moves the result by more
    /// than [`GCQ_ESCALATION_TOL`] relative.
    pub fn avg_ser_with(&self, m: ModulationSpec, method: SerMethod) -> Result<SerEstimate> {
        m.validate()?;
        if let ModulationSpec::Binary { p, q } = m {
            return Ok(SerEstimate { value: self.avg_ber(p, q)?, method, gcq_change: None });
        }
        let (g, terms) = ser_terms(m);
        let failure = RefCell::new(None);
        let integrand = |phi: f64| -> f64 {
            let sin = phi.sin();
            self.mgf(g / (sin * sin)).unwrap_or_else(|e| {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            })
        };
        let take_failure = || failure.borrow_mut().take().map_or(Ok(()), Err);
        let mut gcq_change = None;
        if method == SerMethod::Gcq {
            let (mut value, mut doubled) = (0.0, 0.0);
            for &(w, hi) in &terms {
                let est = gcq_integrate(integrand, 0.0, hi, self.cfg.gcq_nodes);
                take_failure()?;
                let est = est.context(|| format!("GCQ for {m}"))?;
                value += w * est.value;
                doubled += w * est.doubled;
            }
            let change = (doubled - value).abs();
            gcq_change = Some(change);
            if change <= GCQ_ESCALATION_TOL * doubled.abs() {
                return Ok(SerEstimate { value, method: SerMethod::Gcq, gcq_change });
            }
            log::info!("GCQ for {m} moved by {change:e} on doubling; switching to adaptive");
        }
        let mut value = 0.0;
        for &(w, hi) in &terms {
            let v = adaptive_integrate(integrand, 0.0, hi, &self.cfg);
            take_failure()?;
            value += w * v.context(|| format!("adaptive SER integral for {m}"))?;
        }
        Ok(SerEstimate { value, method: SerMethod::Adaptive, gcq_change })
    }

    /// Average BER or SER, whichever applies.
    pub fn error_rate(&self, m: ModulationSpec) -> Result<f64> {
        match m {
            ModulationSpec::Binary { p, q } => self.avg_ber(p, q),
            _ => self.avg_ser(m),
        }
    }

    /// Parameter blocks of the bivariate capacity representation.
    pub fn capacity_spec(&self) -> Result<EgbmgfSpec> {
        let ctx = || "capacity parameter block".to_string();
        Ok(EgbmgfSpec::new(
            MeijerGSpec::new(vec![0.0], vec![], 0, 1).context(ctx)?,
            MeijerGSpec::new(vec![0.0], vec![0.0], 1, 1).context(ctx)?,
            self.ccdf_g.spec().clone(),
        ))
    }

    /// E[log₂(1 + γ)] through the bivariate Meijer G representation.
    pub fn ergodic_capacity(&self) -> Result<f64> {
        let g1 = self.params.gbar1;
        let v = egbmgf(&self.capacity_spec()?, g1, self.derived.b_const, &self.cfg)
            .context(|| format!("capacity for {:?}", self.params))?;
        Ok(self.prefactor * g1 / LN_2 * v)
    }

    /// E[log₂(1 + γ)] as (1/ln 2) ∫ F^c(γ)/(1 + γ) dγ.
    pub fn capacity_oracle(&self) -> Result<f64> {
        let mut failure = None;
        let v = adaptive_integrate_semi_infinite(
            |g| match self.ccdf(g) {
                Ok(c) => c / (1.0 + g),
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            0.0,
            self.params.gbar1,
            &self.cfg,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(v.context(|| "capacity integral".into())? / LN_2)
    }
}

/// G^{6,1}_{2,6}(· | a0, κ₁; κ₂), or G^{5,1}_{1,5}(· | a0; κ₃): the CCDF
/// block with a leading upper parameter a0.
fn upper_block(base: &MeijerG, a0: f64, cfg: QuadratureConfig) -> Result<MeijerG> {
    let base = base.spec();
    let mut a = vec![a0];
    a.extend_from_slice(base.a());
    let spec = MeijerGSpec::new(a, base.b().to_vec(), base.m(), 1)
        .context(|| format!("upper block with a0 = {a0}"))?;
    Ok(MeijerG::new(spec, cfg))
}

/// Argument scale g and the (weight, upper limit) pairs of
/// Σ w ∫₀^L M(g / sin²φ) dφ for the M-ary families.
fn ser_terms(m: ModulationSpec) -> (f64, Vec<(f64, f64)>) {
    match m {
        ModulationSpec::Mpsk { m_order } => {
            let mf = m_order as f64;
            let s = (PI / mf).sin();
            (s * s, vec![(1.0 / PI, (mf - 1.0) * PI / mf)])
        }
        ModulationSpec::Mam { m_order } => {
            let mf = m_order as f64;
            (3.0 / (mf * mf - 1.0), vec![(2.0 * (mf - 1.0) / (mf * PI), PI / 2.0)])
        }
        ModulationSpec::Mqam { m_order } => {
            let mf = m_order as f64;
            let r = 1.0 - 1.0 / mf.sqrt();
            (3.0 / (2.0 * (mf - 1.0)), vec![(4.0 * r / PI, PI / 2.0), (-4.0 * r * r / PI, PI / 4.0)])
        }
        ModulationSpec::Binary { .. } => unreachable!("binary schemes have a closed form"),
    }
}

/// CDF of the end-to-end SNR.
pub fn cdf(params: &LinkParams, gamma: f64) -> Result<f64> {
    LinkModel::new(*params)?.cdf(gamma)
}

/// PDF of the end-to-end SNR.
pub fn pdf(params: &LinkParams, gamma: f64) -> Result<f64> {
    LinkModel::new(*params)?.pdf(gamma)
}

/// MGF E[e^{−sγ}].
pub fn mgf(params: &LinkParams, s: f64) -> Result<f64> {
    LinkModel::new(*params)?.mgf(s)
}

/// Raw moment E[γⁿ].
pub fn moment(params: &LinkParams, n: u32) -> Result<f64> {
    LinkModel::new(*params)?.moment(n)
}

/// n-th order amount of fading.
pub fn af(params: &LinkParams, n: u32) -> Result<f64> {
    LinkModel::new(*params)?.af(n)
}

/// Average BER of a binary scheme.
pub fn avg_ber_binary(params: &LinkParams, m: ModulationSpec) -> Result<f64> {
    LinkModel::new(*params)?.avg_ber_binary(m)
}

pub fn avg_ser_mpsk(params: &LinkParams, m_order: u32) -> Result<f64> {
    LinkModel::new(*params)?.avg_ser_mpsk(m_order)
}

pub fn avg_ser_mam(params: &LinkParams, m_order: u32) -> Result<f64> {
    LinkModel::new(*params)?.avg_ser_mam(m_order)
}

pub fn avg_ser_mqam(params: &LinkParams, m_order: u32) -> Result<f64> {
    LinkModel::new(*params)?.avg_ser_mqam(m_order)
}

/// Ergodic capacity through the bivariate representation.
pub fn ergodic_capacity(params: &LinkParams) -> Result<f64> {
    LinkModel::new(*params)?.ergodic_capacity()
}

/// Ergodic capacity through the single CCDF integral.
pub fn capacity_oracle(params: &LinkParams) -> Result<f64> {
    LinkModel::new(*params)?.capacity_oracle()
}

/// The quantity a [`MetricRequest`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    /// F(γ) over a grid of γ.
    Cdf,
    /// f(γ) over a grid of γ.
    Pdf,
    /// M(s) at fixed s over a grid of ḡ₁.
    Mgf { s: f64 },
    /// E[γⁿ] over a grid of ḡ₁.
    Moment { n: u32 },
    /// AF⁽ⁿ⁾ over a grid of ḡ₁.
    Af { n: u32 },
    /// Average BER or SER over a grid of ḡ₁.
    ErrorRate(ModulationSpec),
    /// Ergodic capacity (bivariate form) over a grid of ḡ₁.
    Capacity,
    /// Ergodic capacity (single-integral form) over a grid of ḡ₁.
    CapacityOracle,
}

impl Metric {
    /// Whether the grid holds SNR thresholds γ rather than ḡ₁ values.
    pub fn grid_is_threshold(&self) -> bool {
        matches!(self, Self::Cdf | Self::Pdf)
    }
}

/// One metric evaluated over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRequest {
    pub params: LinkParams,
    /// Linear values, strictly increasing.
    pub grid: Vec<f64>,
    pub metric: Metric,
    /// On ḡ₁ grids, set ḡ₂ equal to each ḡ₁ as well.
    pub gbar2_tracks_gbar1: bool,
}

impl MetricRequest {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.grid.is_empty() {
            return Err(invalid("grid is empty"));
        }
        if self.grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("grid must be strictly increasing"));
        }
        match self.metric {
            Metric::Moment { n: 0 } | Metric::Af { n: 0 } => Err(invalid("order must be >= 1")),
            Metric::Mgf { s } if !(s >= 0.0) => Err(invalid(format!("MGF point must be >= 0, got {s}"))),
            Metric::ErrorRate(m) => m.validate(),
            _ => Ok(()),
        }
    }

    /// Values at every grid point, in grid order. Grid points are
    /// evaluated in parallel; the result does not depend on scheduling.
    pub fn evaluate(&self, cfg: &QuadratureConfig) -> Result<Vec<f64>> {
        self.validate()?;
        if self.metric.grid_is_threshold() {
            let model = LinkModel::with_config(self.params, *cfg)?;
            return self
                .grid
                .par_iter()
                .map(|&g| match self.metric {
                    Metric::Cdf => model.cdf(g),
                    _ => model.pdf(g),
                })
                .collect();
        }
        self.grid
            .par_iter()
            .map(|&g1| {
                let mut p = self.params.with_gbar1(g1);
                if self.gbar2_tracks_gbar1 {
                    p = p.with_gbar2(g1);
                }
                let model = LinkModel::with_config(p, *cfg)?;
                match self.metric {
                    Metric::Mgf { s } => model.mgf(s),
                    Metric::Moment { n } => model.moment(n),
                    Metric::Af { n } => model.af(n),
                    Metric::ErrorRate(m) => model.error_rate(m),
                    Metric::Capacity => model.ergodic_capacity(),
                    Metric::CapacityOracle => model.capacity_oracle(),
                    Metric::Cdf | Metric::Pdf => unreachable!(),
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests;
