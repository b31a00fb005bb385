//! Physical model of the dual-hop link.
//!
//! The source–relay hop is Rayleigh faded, so its SNR γ₁ is exponential with
//! mean ḡ₁. The relay–destination hop is an IM/DD optical link with
//! Gamma-Gamma turbulence and pointing errors. A fixed-gain relay with
//! constant C combines them into γ = γ₁γ₂/(γ₂ + C).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Open01};

use crate::error::{invalid, Context, Result};
use crate::specfun::{ln_gamma, regularized_upper_gamma, MeijerG, MeijerGSpec, QuadratureConfig};

/// The six physical parameters of a link instance.
///
/// `xi = f64::INFINITY` stands for a link without pointing errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    /// Turbulence parameter α.
    pub alpha: f64,
    /// Turbulence parameter β.
    pub beta: f64,
    /// Ratio of equivalent beam radius to pointing jitter deviation.
    pub xi: f64,
    /// Fixed relay gain constant C.
    pub relay_gain_c: f64,
    /// Average SNR of the RF hop, linear.
    pub gbar1: f64,
    /// Average SNR of the optical hop, linear.
    pub gbar2: f64,
}

impl LinkParams {
    pub fn new(
        alpha: f64,
        beta: f64,
        xi: f64,
        relay_gain_c: f64,
        gbar1: f64,
        gbar2: f64,
    ) -> Result<Self> {
        let p = Self { alpha, beta, xi, relay_gain_c, gbar1, gbar2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("relay_gain_c", self.relay_gain_c),
            ("gbar1", self.gbar1),
            ("gbar2", self.gbar2),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.xi > 0.0) {
            return Err(invalid(format!("xi must be positive (or inf), got {}", self.xi)));
        }
        Ok(())
    }

    pub fn has_pointing_error(&self) -> bool {
        self.xi.is_finite()
    }

    pub fn with_gbar1(mut self, gbar1: f64) -> Self {
        self.gbar1 = gbar1;
        self
    }

    pub fn with_gbar2(mut self, gbar2: f64) -> Self {
        self.gbar2 = gbar2;
        self
    }

    pub fn with_xi(mut self, xi: f64) -> Self {
        self.xi = xi;
        self
    }

    pub fn derived(&self) -> DerivedConstants {
        DerivedConstants::new(self)
    }
}

/// Constants of the closed-form results, recomputed from [`LinkParams`].
///
/// `a1`, `kappa1` and `kappa2` only exist for finite ξ.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedConstants {
    pub a1: Option<f64>,
    pub a2: f64,
    pub b_const: f64,
    pub kappa1: Option<f64>,
    pub kappa2: Option<[f64; 6]>,
    pub kappa3: [f64; 5],
    pub kappa4: [f64; 5],
}

impl DerivedConstants {
    fn new(p: &LinkParams) -> Self {
        let (a, b) = (p.alpha, p.beta);
        // α, β > 0 keeps ln Γ away from its poles.
        let ln_gg = ln_gamma(a).expect("alpha > 0") + ln_gamma(b).expect("beta > 0");
        let ln_a2 = (a + b) * std::f64::consts::LN_2 - (4.0 * PI).ln() - ln_gg;
        let finite = p.xi.is_finite();
        let half_xi2 = 0.5 * p.xi * p.xi;
        Self {
            // A₁ = (ξ²/2) A₂
            a1: finite.then(|| (ln_a2 + half_xi2.ln()).exp()),
            a2: ln_a2.exp(),
            b_const: (a * b).powi(2) * p.relay_gain_c / (16.0 * p.gbar2),
            kappa1: finite.then_some(half_xi2 + 1.0),
            kappa2: finite
                .then_some([half_xi2, a / 2.0, (a + 1.0) / 2.0, b / 2.0, (b + 1.0) / 2.0, 0.0]),
            kappa3: [a / 2.0, (a + 1.0) / 2.0, b / 2.0, (b + 1.0) / 2.0, 0.0],
            kappa4: [a / 2.0 - 1.0, (a - 1.0) / 2.0, b / 2.0 - 1.0, (b - 1.0) / 2.0, 0.0],
        }
    }
}

/// Modulation scheme: binary with conditional error Γ(p, qγ)/(2Γ(p)), or
/// one of the M-ary families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModulationSpec {
    Binary { p: f64, q: f64 },
    Mpsk { m_order: u32 },
    Mam { m_order: u32 },
    Mqam { m_order: u32 },
}

impl ModulationSpec {
    pub const CBFSK: Self = Self::Binary { p: 0.5, q: 0.5 };
    pub const CBPSK: Self = Self::Binary { p: 0.5, q: 1.0 };
    pub const NBFSK: Self = Self::Binary { p: 1.0, q: 0.5 };
    pub const DBPSK: Self = Self::Binary { p: 1.0, q: 1.0 };

    /// The named binary schemes with their labels.
    pub const NAMED_BINARY: [(&'static str, Self); 4] = [
        ("cbfsk", Self::CBFSK),
        ("cbpsk", Self::CBPSK),
        ("nbfsk", Self::NBFSK),
        ("dbpsk", Self::DBPSK),
    ];

    pub fn binary(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite() && q > 0.0 && q.is_finite()) {
            return Err(invalid(format!("binary modulation needs p, q > 0, got ({p}, {q})")));
        }
        Ok(Self::Binary { p, q })
    }

    pub fn mpsk(m_order: u32) -> Result<Self> {
        check_order(m_order)?;
        Ok(Self::Mpsk { m_order })
    }

    pub fn mam(m_order: u32) -> Result<Self> {
        check_order(m_order)?;
        Ok(Self::Mam { m_order })
    }

    pub fn mqam(m_order: u32) -> Result<Self> {
        let side = (m_order as f64).sqrt().round() as u32;
        if m_order < 4 || side * side != m_order {
            return Err(invalid(format!(
                "QAM order must be a perfect square >= 4, got {m_order}"
            )));
        }
        Ok(Self::Mqam { m_order })
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, Self::Binary { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Binary { p, q } => Self::binary(p, q).map(drop),
            Self::Mpsk { m_order } => Self::mpsk(m_order).map(drop),
            Self::Mam { m_order } => Self::mam(m_order).map(drop),
            Self::Mqam { m_order } => Self::mqam(m_order).map(drop),
        }
    }
}

fn check_order(m_order: u32) -> Result<()> {
    if m_order < 2 {
        return Err(invalid(format!("modulation order must be >= 2, got {m_order}")));
    }
    Ok(())
}

impl fmt::Display for ModulationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Binary { p, q } => {
                match Self::NAMED_BINARY.iter().find(|(_, m)| *m == *self) {
                    Some((name, _)) => f.write_str(name),
                    None => write!(f, "binary:{p}:{q}"),
                }
            }
            Self::Mpsk { m_order } => write!(f, "mpsk:{m_order}"),
            Self::Mam { m_order } => write!(f, "mam:{m_order}"),
            Self::Mqam { m_order } => write!(f, "mqam:{m_order}"),
        }
    }
}

impl FromStr for ModulationSpec {
    type Err = crate::Error;

    /// Accepts `cbfsk`, `cbpsk`, `nbfsk`, `dbpsk`, `binary:p:q`, `mpsk:M`,
    /// `mam:M` and `mqam:M`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        if let Some((_, m)) = Self::NAMED_BINARY.iter().find(|(n, _)| *n == lower) {
            return Ok(*m);
        }
        let parts: Vec<&str> = lower.split(':').collect();
        let num = |t: &str| -> Result<f64> {
            t.parse::<f64>().map_err(|_| invalid(format!("bad number {t:?} in modulation {s:?}")))
        };
        let order = |t: &str| -> Result<u32> {
            t.parse::<u32>().map_err(|_| invalid(format!("bad order {t:?} in modulation {s:?}")))
        };
        match parts.as_slice() {
            ["binary", p, q] => Self::binary(num(p)?, num(q)?),
            ["mpsk", m] => Self::mpsk(order(m)?),
            ["mam", m] => Self::mam(order(m)?),
            ["mqam", m] => Self::mqam(order(m)?),
            _ => Err(invalid(format!(
                "unknown modulation {s:?}; expected cbfsk, cbpsk, nbfsk, dbpsk, mpsk:M, mam:M or mqam:M"
            ))),
        }
    }
}

/// One draw of the RF-hop SNR, exponential with mean `gbar1`.
pub fn sample_rf_snr<R: Rng + ?Sized>(gbar1: f64, rng: &mut R) -> f64 {
    let e: f64 = Exp1.sample(rng);
    gbar1 * e
}

/// Pointing-gain fraction I_p/A₀ = U^{1/ξ²}; its CDF is u ↦ u^{ξ²}.
pub fn sample_pointing_fraction<R: Rng + ?Sized>(xi: f64, rng: &mut R) -> f64 {
    let u: f64 = Open01.sample(rng);
    u.powf(1.0 / (xi * xi))
}

/// How the optical gain h is scaled before γ₂ = ḡ₂h².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GainNormalization {
    /// h = I_a · I_p/A₀, so ḡ₂ is the SNR at the pointing-gain ceiling.
    #[default]
    PointingCeiling,
    /// h = I_a · I_p/E[I_p], so E[h] = 1.
    UnitMean,
}

/// Sampler for the optical-hop SNR γ₂.
#[derive(Debug, Clone)]
pub struct FsoSampler {
    gbar2: f64,
    inv_xi2: Option<f64>,
    scale: f64,
    x: Gamma<f64>,
    y: Gamma<f64>,
}

impl FsoSampler {
    pub fn new(params: &LinkParams, normalization: GainNormalization) -> Result<Self> {
        params.validate()?;
        let gamma = |shape: f64| {
            Gamma::new(shape, 1.0 / shape)
                .map_err(|e| invalid(format!("gamma shape {shape}: {e}")))
        };
        let xi2 = params.xi * params.xi;
        let scale = match normalization {
            GainNormalization::UnitMean if params.has_pointing_error() => (xi2 + 1.0) / xi2,
            _ => 1.0,
        };
        Ok(Self {
            gbar2: params.gbar2,
            inv_xi2: params.has_pointing_error().then(|| 1.0 / xi2),
            scale,
            x: gamma(params.alpha)?,
            y: gamma(params.beta)?,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let turbulence = self.x.sample(rng) * self.y.sample(rng);
        let pointing = match self.inv_xi2 {
            Some(e) => {
                let u: f64 = Open01.sample(rng);
                u.powf(e)
            }
            None => 1.0,
        };
        let h = turbulence * pointing * self.scale;
        self.gbar2 * h * h
    }
}

/// One draw of the optical-hop SNR with the default gain normalization.
/// Builds a sampler per call; use [`FsoSampler`] in loops.
pub fn sample_fso_snr<R: Rng + ?Sized>(params: &LinkParams, rng: &mut R) -> Result<f64> {
    Ok(FsoSampler::new(params, GainNormalization::default())?.sample(rng))
}

/// Sampler for the end-to-end SNR.
#[derive(Debug, Clone)]
pub struct LinkSampler {
    gbar1: f64,
    c: f64,
    fso: FsoSampler,
}

impl LinkSampler {
    pub fn new(params: &LinkParams) -> Result<Self> {
        Self::with_normalization(params, GainNormalization::default())
    }

    pub fn with_normalization(params: &LinkParams, norm: GainNormalization) -> Result<Self> {
        Ok(Self {
            gbar1: params.gbar1,
            c: params.relay_gain_c,
            fso: FsoSampler::new(params, norm)?,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g1 = sample_rf_snr(self.gbar1, rng);
        let g2 = self.fso.sample(rng);
        end_to_end_snr(g1, g2, self.c)
    }
}

/// γ₁γ₂/(γ₂ + C).
pub fn end_to_end_snr(gamma1: f64, gamma2: f64, c: f64) -> f64 {
    if gamma2.is_infinite() {
        return gamma1;
    }
    gamma1 * gamma2 / (gamma2 + c)
}

/// Conditional bit error probability Γ(p, qγ)/(2Γ(p)).
pub fn conditional_ber(p: f64, q: f64, gamma: f64) -> Result<f64> {
    if !(q > 0.0) || !(gamma >= 0.0) {
        return Err(invalid(format!("conditional BER needs q > 0, gamma >= 0, got {q}, {gamma}")));
    }
    let v = regularized_upper_gamma(p, q * gamma).context(|| format!("Γ({p}, {})", q * gamma))?;
    Ok(0.5 * v)
}

/// Density of the optical-hop SNR.
#[derive(Debug, Clone)]
pub struct FsoDensity {
    prefactor: f64,
    arg_scale: f64,
    g: MeijerG,
}

impl FsoDensity {
    pub fn new(params: &LinkParams) -> Result<Self> {
        params.validate()?;
        let (a, b) = (params.alpha, params.beta);
        let ln_gg = ln_gamma(a).expect("alpha > 0") + ln_gamma(b).expect("beta > 0");
        let cfg = QuadratureConfig::default();
        let (prefactor, spec) = if params.has_pointing_error() {
            let xi2 = params.xi * params.xi;
            (xi2 / 2.0, MeijerGSpec::new(vec![xi2 + 1.0], vec![xi2, a, b], 3, 0))
        } else {
            (0.5, MeijerGSpec::new(vec![], vec![a, b], 2, 0))
        };
        let spec = spec.context(|| "optical-hop density block".into())?;
        Ok(Self {
            prefactor: prefactor * (-ln_gg).exp(),
            arg_scale: a * b / params.gbar2.sqrt(),
            g: MeijerG::new(spec, cfg),
        })
    }

    pub fn pdf(&self, gamma2: f64) -> Result<f64> {
        if !(gamma2 > 0.0) {
            return Err(invalid(format!("optical SNR must be positive, got {gamma2}")));
        }
        let z = self.arg_scale * gamma2.sqrt();
        let g = self.g.eval(z).context(|| format!("optical-hop density at γ₂ = {gamma2}"))?;
        Ok(self.prefactor * g / gamma2)
    }
}

/// Density of the optical-hop SNR at `gamma2`.
pub fn fso_snr_pdf(params: &LinkParams, gamma2: f64) -> Result<f64> {
    FsoDensity::new(params)?.pdf(gamma2)
}
