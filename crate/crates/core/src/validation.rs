//! Acceptance checks: closed forms against oracles, limits and Monte-Carlo.
//!
//! Every check measures one number and compares it with a fixed bound. The
//! report is a pure function of [`ValidationConfig`], so two runs with the
//! same seed render byte-identical text and CSV.

use std::fmt;

use crate::analytics::oracles::{cdf_derivative, laplace_transform, moment_from_ccdf};
use crate::analytics::{LinkModel, SerMethod};
use crate::channel::{GainNormalization, LinkParams, ModulationSpec};
use crate::curve::Curve;
use crate::error::{Context, Result};
use crate::montecarlo::{self, Estimate, McConfig};
use crate::specfun::{ln_gamma, meijer_g, MeijerG, MeijerGSpec, QuadratureConfig, SpecfunError};

pub const ALPHA: f64 = 2.1;
pub const BETA: f64 = 3.5;
pub const RELAY_C: f64 = 0.6;

/// Tolerances of the acceptance criteria.
pub mod tol {
    pub const IDENTITY: f64 = 1e-10;
    pub const KS: f64 = 0.005;
    pub const KS_XI_LIMIT: f64 = 0.01;
    pub const PDF_DERIVATIVE: f64 = 1e-4;
    pub const MGF_LAPLACE: f64 = 1e-5;
    pub const MOMENT_ORACLE: f64 = 1e-6;
    pub const XI_LIMIT: f64 = 1e-2;
    pub const SIGMAS: f64 = 3.0;
    pub const GCQ_ADAPTIVE: f64 = 1e-5;
    pub const GCQ_DOUBLING: f64 = 1e-8;
    pub const M2_REDUCTION: f64 = 1e-4;
    pub const CAPACITY_ORACLE: f64 = 1e-3;
    pub const AF_COMPOSITION: f64 = 1e-9;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationConfig {
    pub seed: u64,
    /// Draws for KS, BER and SER checks.
    pub samples: u64,
    /// Draws for moment, amount-of-fading and capacity checks.
    pub large_samples: u64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self { seed: 20_130_905, samples: 1_000_000, large_samples: 10_000_000 }
    }
}

impl ValidationConfig {
    /// Small sample counts for smoke runs; statistical checks may fail.
    pub fn reduced(seed: u64) -> Self {
        Self { seed, samples: 100_000, large_samples: 200_000 }
    }

    /// Independent seed per check, derived from the master seed.
    fn mc(&self, tag: u64, large: bool) -> McConfig {
        let seed = self.seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        McConfig::new(if large { self.large_samples } else { self.samples }, seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    Above(f64),
    Exactly(f64),
}

impl Bound {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Bound::AtMost(t) => v <= t,
            Bound::Above(t) => v > t,
            Bound::Exactly(t) => v == t,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::AtMost(t) => write!(f, "<= {t:e}"),
            Bound::Above(t) => write!(f, "> {t:e}"),
            Bound::Exactly(t) => write!(f, "== {t:e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub id: String,
    pub criterion: u8,
    pub measured: f64,
    pub bound: Bound,
}

impl Check {
    /// NaN, from a failed evaluation, never passes.
    pub fn passed(&self) -> bool {
        self.bound.holds(self.measured)
    }

    pub fn line(&self) -> String {
        format!(
            "{} | {:.3e} | {} | {}",
            self.id,
            self.measured,
            self.bound,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

/// Checks and notes of one criterion.
#[derive(Debug, Clone, Default)]
pub struct Section {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub curve: Option<Curve>,
}

impl Section {
    fn record(&mut self, criterion: u8, id: impl Into<String>, bound: Bound, v: Result<f64>) {
        let id = id.into();
        let measured = v.unwrap_or_else(|e| {
            self.notes.push(format!("{id}: {e}"));
            f64::NAN
        });
        self.checks.push(Check { id, criterion, measured, bound });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub config: ValidationConfig,
    pub sections: Vec<(u8, Section)>,
}

impl Report {
    pub fn checks(&self) -> impl Iterator<Item = &Check> {
        self.sections.iter().flat_map(|(_, s)| &s.checks)
    }

    pub fn passed(&self) -> bool {
        self.checks().all(Check::passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks().filter(|c| !c.passed()).collect()
    }

    pub fn section(&self, criterion: u8) -> Option<&Section> {
        self.sections.iter().find(|(c, _)| *c == criterion).map(|(_, s)| s)
    }

    /// Capacity against ξ with analytic, oracle and Monte-Carlo columns.
    pub fn capacity_vs_xi(&self) -> Option<&Curve> {
        self.sections.iter().find_map(|(_, s)| s.curve.as_ref())
    }

    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut out = format!(
            "# relaylink validation report\n# seed = {}, samples = {}, large samples = {}\n\
             # alpha = {ALPHA}, beta = {BETA}, C = {RELAY_C}\n",
            c.seed, c.samples, c.large_samples
        );
        for (n, s) in &self.sections {
            out.push_str(&format!("# criterion {n}\n"));
            for note in &s.notes {
                out.push_str(&format!("# {note}\n"));
            }
            for check in &s.checks {
                out.push_str(&check.line());
                out.push('\n');
            }
        }
        let failed = self.failures().len();
        out.push_str(&format!(
            "# {} checks, {} failed: {}\n",
            self.checks().count(),
            failed,
            if failed == 0 { "PASS" } else { "FAIL" }
        ));
        out
    }
}

/// Runs every criterion in order.
pub fn run(cfg: &ValidationConfig) -> Report {
    Report { config: *cfg, sections: (1..=10).map(|n| (n, criterion(n, cfg))).collect() }
}

/// Runs the checks of one criterion (1 to 10; anything else is empty).
pub fn criterion(n: u8, cfg: &ValidationConfig) -> Section {
    let mut s = Section::default();
    match n {
        1 => identities(&mut s),
        2 => cdf_vs_sampler(&mut s, cfg),
        3 => pdf_vs_cdf(&mut s),
        4 => mgf_and_moments(&mut s, cfg),
        5 => xi_limit(&mut s, cfg),
        6 => ber(&mut s, cfg),
        7 => ser(&mut s, cfg),
        8 => capacity(&mut s, cfg),
        9 => determinism(&mut s, cfg),
        10 => amount_of_fading(&mut s, cfg),
        _ => {}
    }
    s
}

pub fn params(xi: f64, gbar: f64) -> LinkParams {
    LinkParams { alpha: ALPHA, beta: BETA, xi, relay_gain_c: RELAY_C, gbar1: gbar, gbar2: gbar }
}

fn model(xi: f64, gbar: f64) -> Result<LinkModel> {
    LinkModel::new(params(xi, gbar))
}

fn xi_tag(xi: f64) -> String {
    if xi.is_finite() {
        format!("XI{xi}")
    } else {
        "XIINF".into()
    }
}

fn rel(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

fn max_of(it: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    it.into_iter().try_fold(0.0f64, |m, v| {
        let v = v?;
        Ok(if v.is_nan() { f64::NAN } else { m.max(v) })
    })
}

fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn z(est: Result<Estimate>, reference: Result<f64>) -> Result<f64> {
    Ok(est?.z_score(reference?).abs())
}

fn sf(v: std::result::Result<f64, SpecfunError>) -> Result<f64> {
    v.context(|| "identity battery".into())
}

fn identities(s: &mut Section) {
    let cfg = QuadratureConfig::default();
    let zs = [0.1, 1.0, 10.0];
    let families: [(&str, MeijerGSpec, fn(f64) -> f64); 2] = [
        ("C1-EXP", MeijerGSpec::new(vec![], vec![0.0], 1, 0).unwrap(), |z| (-z).exp()),
        ("C1-EXP-INV", MeijerGSpec::new(vec![1.0], vec![], 0, 1).unwrap(), |z| (-1.0 / z).exp()),
    ];
    for (id, spec, f) in families {
        let prepared = MeijerG::new(spec.clone(), cfg);
        s.record(1, format!("{id}-CONTOUR"), Bound::AtMost(tol::IDENTITY),
            max_of(zs.iter().map(|&z| Ok(rel(sf(meijer_g(&spec, z, &cfg))?, f(z))))));
        s.record(1, format!("{id}-AUTO"), Bound::AtMost(tol::IDENTITY),
            max_of(zs.iter().map(|&z| Ok(rel(sf(prepared.eval(z))?, f(z))))));
    }
    for b in [0.5, 1.0, 2.5] {
        let spec = MeijerGSpec::new(vec![1.0 - b], vec![0.0], 1, 1).unwrap();
        let prepared = MeijerG::new(spec.clone(), cfg);
        let want = |z: f64| -> Result<f64> { Ok(sf(ln_gamma(b))?.exp() * (1.0 + z).powf(-b)) };
        s.record(1, format!("C1-BINOMIAL-B{b}-CONTOUR"), Bound::AtMost(tol::IDENTITY),
            max_of(zs.iter().map(|&z| Ok(rel(sf(meijer_g(&spec, z, &cfg))?, want(z)?)))));
        s.record(1, format!("C1-BINOMIAL-B{b}-AUTO"), Bound::AtMost(tol::IDENTITY),
            max_of(zs.iter().map(|&z| Ok(rel(sf(prepared.eval(z))?, want(z)?)))));
    }
}

fn cdf_vs_sampler(s: &mut Section, cfg: &ValidationConfig) {
    let mut tag = 200;
    for xi in [1.0, 6.7, f64::INFINITY] {
        for gbar in [10.0, 20.0] {
            tag += 1;
            let ks = (|| {
                let m = model(xi, gbar)?;
                let draws = montecarlo::sorted_snr(m.params(), &cfg.mc(tag, false))?;
                montecarlo::ks_distance_par(&draws, |g| m.cdf(g))
            })();
            s.record(2, format!("C2-KS-{}-G{gbar}", xi_tag(xi)), Bound::AtMost(tol::KS), ks);
        }
    }
    // The optical gain normalization is settled by the closed-form CDF: the
    // alternative convention must be rejected at the same sample size.
    let ks = (|| {
        let m = model(1.0, 10.0)?;
        let mut draws =
            montecarlo::sample_snr_with(m.params(), GainNormalization::UnitMean, &cfg.mc(tag + 1, false))?;
        draws.sort_unstable_by(f64::total_cmp);
        montecarlo::ks_distance_par(&draws, |g| m.cdf(g))
    })();
    s.notes.push(
        "optical SNR normalized to the pointing-gain ceiling; the unit-mean convention is \
         checked below and must be rejected"
            .into(),
    );
    s.record(2, "C2-KS-UNIT-MEAN-REJECTED-XI1-G10", Bound::Above(tol::KS), ks);
}

fn pdf_vs_cdf(s: &mut Section) {
    let grid = geometric_grid(0.01, 100.0, 20);
    for xi in [1.0, 2.0, 6.7, f64::INFINITY] {
        let v = model(xi, 10.0).and_then(|m| {
            max_of(grid.iter().map(|&g| Ok(rel(m.pdf(g)?, cdf_derivative(&m, g)?))))
        });
        s.record(3, format!("C3-PDF-CDF-DERIVATIVE-{}", xi_tag(xi)), Bound::AtMost(tol::PDF_DERIVATIVE), v);
    }
    s.notes.push("pdf ships as the closed form, checked against the CDF derivative below".into());
}

fn mgf_and_moments(s: &mut Section, cfg: &ValidationConfig) {
    for xi in [1.0, 6.7, f64::INFINITY] {
        let m = model(xi, 10.0);
        let tag = xi_tag(xi);
        for sv in [0.1, 1.0, 10.0] {
            let v = m.as_ref().map_err(Clone::clone).and_then(|m| Ok(rel(m.mgf(sv)?, laplace_transform(m, sv)?)));
            s.record(4, format!("C4-MGF-LAPLACE-{tag}-S{sv}"), Bound::AtMost(tol::MGF_LAPLACE), v);
        }
        for n in [1, 2] {
            let v = m.as_ref().map_err(Clone::clone).and_then(|m| Ok(rel(m.moment(n)?, moment_from_ccdf(m, n)?)));
            s.record(4, format!("C4-MOMENT-CCDF-{tag}-N{n}"), Bound::AtMost(tol::MOMENT_ORACLE), v);
        }
    }
    for (k, xi) in [1.0, f64::INFINITY].into_iter().enumerate() {
        for n in [1u32, 2] {
            let p = params(xi, 10.0);
            let v = z(
                montecarlo::estimate_moment(&p, n, &cfg.mc(400 + 10 * k as u64 + n as u64, true)),
                crate::analytics::moment(&p, n),
            );
            s.record(4, format!("C4-MOMENT-MC-{}-N{n}", xi_tag(xi)), Bound::AtMost(tol::SIGMAS), v);
        }
    }
}

fn xi_limit(s: &mut Section, cfg: &ValidationConfig) {
    let pair = || -> Result<(LinkModel, LinkModel)> { Ok((model(50.0, 10.0)?, model(f64::INFINITY, 10.0)?)) };
    let grid = [0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0];
    type Metric = fn(&LinkModel, f64) -> Result<f64>;
    let metrics: [(&str, Vec<f64>, Metric); 9] = [
        ("CDF", grid.to_vec(), |m, g| m.cdf(g)),
        ("PDF", grid.to_vec(), |m, g| m.pdf(g)),
        ("MGF", vec![0.1, 1.0, 10.0], |m, sv| m.mgf(sv)),
        ("MOMENT", vec![1.0, 2.0, 3.0], |m, n| m.moment(n as u32)),
        ("AF", vec![2.0, 3.0], |m, n| m.af(n as u32)),
        ("BER-CBFSK", vec![1.0, 10.0, 100.0], |m, g| ber_at(m, ModulationSpec::CBFSK, g)),
        ("BER-CBPSK", vec![1.0, 10.0, 100.0], |m, g| ber_at(m, ModulationSpec::CBPSK, g)),
        ("BER-NBFSK", vec![1.0, 10.0, 100.0], |m, g| ber_at(m, ModulationSpec::NBFSK, g)),
        ("BER-DBPSK", vec![1.0, 10.0, 100.0], |m, g| ber_at(m, ModulationSpec::DBPSK, g)),
    ];
    for (name, xs, f) in metrics {
        let v = pair().and_then(|(a, b)| max_of(xs.iter().map(|&x| Ok(rel(f(&a, x)?, f(&b, x)?)))));
        s.record(5, format!("C5-XI50-{name}"), Bound::AtMost(tol::XI_LIMIT), v);
    }
    for m in [ModulationSpec::Mpsk { m_order: 8 }, ModulationSpec::Mam { m_order: 4 }, ModulationSpec::Mqam { m_order: 16 }] {
        let v = pair().and_then(|(a, b)| Ok(rel(a.avg_ser(m)?, b.avg_ser(m)?)));
        s.record(5, format!("C5-XI50-SER-{}", id_of(m)), Bound::AtMost(tol::XI_LIMIT), v);
    }
    let v = (|| Ok(rel(model(50.0, 15.0)?.ergodic_capacity()?, model(f64::INFINITY, 15.0)?.ergodic_capacity()?)))();
    s.record(5, "C5-XI50-CAPACITY", Bound::AtMost(tol::XI_LIMIT), v);

    let v = (|| {
        let a = montecarlo::sorted_fso_snr(&params(50.0, 10.0), &cfg.mc(501, false))?;
        let b = montecarlo::sorted_fso_snr(&params(f64::INFINITY, 10.0), &cfg.mc(502, false))?;
        montecarlo::ks_two_sample(&a, &b)
    })();
    s.record(5, "C5-XI50-OPTICAL-SAMPLER-KS", Bound::AtMost(tol::KS_XI_LIMIT), v);
}

fn ber_at(m: &LinkModel, modulation: ModulationSpec, gbar: f64) -> Result<f64> {
    let p = *m.params();
    LinkModel::with_config(p.with_gbar1(gbar).with_gbar2(gbar), *m.config())?.avg_ber_binary(modulation)
}

fn id_of(m: ModulationSpec) -> String {
    m.to_string().replace(':', "").to_uppercase()
}

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

fn ber(s: &mut Section, cfg: &ValidationConfig) {
    let mut tag = 600;
    for (name, m) in ModulationSpec::NAMED_BINARY {
        for g_db in [10.0, 20.0] {
            tag += 1;
            let p = params(1.0, db(g_db));
            let v = z(
                montecarlo::estimate_ber(&p, m, &cfg.mc(tag, false)),
                LinkModel::new(p).and_then(|l| l.avg_ber_binary(m)),
            );
            s.record(6, format!("C6-BER-MC-{}-G{g_db}DB", name.to_uppercase()), Bound::AtMost(tol::SIGMAS), v);
        }
    }
    let v = (|| {
        let p = params(1.0, 1.0);
        let c = cfg.mc(650, false);
        let a = montecarlo::estimate_ber(&p, ModulationSpec::DBPSK, &c)?;
        let b = montecarlo::estimate_ber_direct(&p, ModulationSpec::DBPSK, &c)?;
        Ok((a.value - b.value).abs() / a.std_error.hypot(b.std_error))
    })();
    s.record(6, "C6-BER-BIT-FLIP-DBPSK-G0DB", Bound::AtMost(tol::SIGMAS), v);

    // BER over the 0 to 40 dB grid for each ξ and scheme.
    let grid: Vec<f64> = (0..=8).map(|k| 5.0 * k as f64).collect();
    let xis = [1.0, 2.0, 6.7];
    let curves = (|| {
        let mut out = Vec::new();
        for xi in xis {
            let mut per_scheme = Vec::new();
            for (_, m) in ModulationSpec::NAMED_BINARY {
                let row: Result<Vec<f64>> =
                    grid.iter().map(|&g| model(xi, db(g))?.avg_ber_binary(m)).collect();
                per_scheme.push(row?);
            }
            out.push(per_scheme);
        }
        Ok(out)
    })();
    let scheme = |name: &str| ModulationSpec::NAMED_BINARY.iter().position(|(n, _)| *n == name).unwrap();
    let (cbpsk, nbfsk) = (scheme("cbpsk"), scheme("nbfsk"));
    for (k, xi) in xis.into_iter().enumerate() {
        if xi == 2.0 {
            continue;
        }
        let v = curves.as_ref().map_err(Clone::clone).map(|c| {
            c[k][cbpsk].iter().zip(&c[k][nbfsk]).map(|(a, b)| (b - a) / b).fold(f64::INFINITY, f64::min)
        });
        s.record(6, format!("C6-CBPSK-BELOW-NBFSK-{}", xi_tag(xi)), Bound::Above(0.0), v);
        let v = curves.as_ref().map_err(Clone::clone).map(|c| {
            c[k].iter()
                .flat_map(|row| row.windows(2).map(|w| (w[0] - w[1]) / w[0]))
                .fold(f64::INFINITY, f64::min)
        });
        s.record(6, format!("C6-BER-DECREASING-IN-GBAR1-{}", xi_tag(xi)), Bound::Above(0.0), v);
    }
    let v = curves.as_ref().map_err(Clone::clone).map(|c| {
        let mut worst = f64::NEG_INFINITY;
        for j in 0..ModulationSpec::NAMED_BINARY.len() {
            for i in 0..grid.len() {
                for k in 0..xis.len() - 1 {
                    worst = worst.max((c[k + 1][j][i] - c[k][j][i]) / c[k][j][i]);
                }
            }
        }
        worst
    });
    s.record(6, "C6-BER-NONINCREASING-IN-XI", Bound::AtMost(0.0), v);
}

fn ser(s: &mut Section, cfg: &ValidationConfig) {
    let fig2 = model(1.0, 10.0);
    let schemes = [ModulationSpec::Mpsk { m_order: 8 }, ModulationSpec::Mam { m_order: 4 }, ModulationSpec::Mqam { m_order: 16 }];
    for (k, m) in schemes.into_iter().enumerate() {
        let id = id_of(m);
        let g = fig2.as_ref().map_err(Clone::clone).and_then(|l| l.avg_ser_with(m, SerMethod::Gcq));
        let a = fig2.as_ref().map_err(Clone::clone).and_then(|l| l.avg_ser_with(m, SerMethod::Adaptive));
        let v = match (&g, &a) {
            (Ok(g), Ok(a)) => Ok(rel(g.value, a.value)),
            (Err(e), _) | (_, Err(e)) => Err(e.clone()),
        };
        s.record(7, format!("C7-GCQ-ADAPTIVE-{id}"), Bound::AtMost(tol::GCQ_ADAPTIVE), v);
        let v = g.clone().map(|g| g.gcq_change.unwrap_or(f64::NAN));
        s.record(7, format!("C7-GCQ-DOUBLING-{id}"), Bound::AtMost(tol::GCQ_DOUBLING), v);
        let v = z(montecarlo::estimate_ser(&params(1.0, 10.0), m, &cfg.mc(700 + k as u64, false)), g.map(|g| g.value));
        s.record(7, format!("C7-SER-MC-{id}"), Bound::AtMost(tol::SIGMAS), v);
    }
    for m in [ModulationSpec::Mpsk { m_order: 2 }, ModulationSpec::Mam { m_order: 2 }] {
        let v = fig2
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|l| Ok(rel(l.avg_ser(m)?, l.avg_ber_binary(ModulationSpec::CBPSK)?)));
        s.record(7, format!("C7-M2-REDUCTION-{}", id_of(m)), Bound::AtMost(tol::M2_REDUCTION), v);
    }
}

pub const CAPACITY_XI_SWEEP: [f64; 8] = [1.0, 1.5, 2.0, 3.0, 4.5, 6.7, 10.0, f64::INFINITY];
pub const CAPACITY_GBAR: f64 = 15.0;

fn capacity(s: &mut Section, cfg: &ValidationConfig) {
    for (k, xi) in [1.0, f64::INFINITY].into_iter().enumerate() {
        let m = model(xi, CAPACITY_GBAR);
        let c = m.as_ref().map_err(Clone::clone).and_then(LinkModel::ergodic_capacity);
        let v = m.as_ref().map_err(Clone::clone).and_then(|m| Ok(rel(c.clone()?, m.capacity_oracle()?)));
        s.record(8, format!("C8-CAPACITY-ORACLE-{}-G15", xi_tag(xi)), Bound::AtMost(tol::CAPACITY_ORACLE), v);
        let v = z(montecarlo::estimate_capacity(&params(xi, CAPACITY_GBAR), &cfg.mc(800 + k as u64, true)), c);
        s.record(8, format!("C8-CAPACITY-MC-{}-G15", xi_tag(xi)), Bound::AtMost(tol::SIGMAS), v);
    }

    match capacity_sweep(cfg) {
        Ok(curve) => {
            for col in ["capacity", "capacity_oracle", "capacity_mc"] {
                let ys = curve.column(col).expect("sweep columns");
                s.notes.push(format!("capacity vs xi ({col}): {}", direction(ys)));
            }
            s.curve = Some(curve);
        }
        Err(e) => s.notes.push(format!("capacity vs xi sweep failed: {e}")),
    }
}

/// Capacity at ḡ₁ = ḡ₂ = 15 over [`CAPACITY_XI_SWEEP`].
pub fn capacity_sweep(cfg: &ValidationConfig) -> Result<Curve> {
    let xs = CAPACITY_XI_SWEEP.to_vec();
    let mut analytic = Vec::new();
    let mut oracle = Vec::new();
    let mut mc = Vec::new();
    let mut se = Vec::new();
    for (k, &xi) in xs.iter().enumerate() {
        let m = model(xi, CAPACITY_GBAR)?;
        analytic.push(m.ergodic_capacity()?);
        oracle.push(m.capacity_oracle()?);
        let e = montecarlo::estimate_capacity(m.params(), &cfg.mc(850 + k as u64, false))?;
        mc.push(e.value);
        se.push(e.std_error);
    }
    let mut curve = Curve::new("xi", xs)
        .with_meta("gbar_db", format!("{}", 10.0 * CAPACITY_GBAR.log10()))
        .with_meta("seed", cfg.seed.to_string());
    curve.push_column("capacity", analytic)?;
    curve.push_column("capacity_oracle", oracle)?;
    curve.push_column("capacity_mc", mc)?;
    curve.push_column("capacity_mc_std_error", se)?;
    Ok(curve)
}

fn direction(ys: &[f64]) -> &'static str {
    let up = ys.windows(2).all(|w| w[1] >= w[0]);
    let down = ys.windows(2).all(|w| w[1] <= w[0]);
    match (up, down) {
        (true, false) => "increases with xi",
        (false, true) => "decreases with xi",
        (true, true) => "flat",
        _ => "not monotone",
    }
}

fn determinism(s: &mut Section, cfg: &ValidationConfig) {
    let c = McConfig::new(cfg.samples.min(200_000).max(64), cfg.seed);
    let p = params(1.0, 10.0);
    let run = |threads: usize| -> Result<Vec<u64>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        pool.install(|| {
            let mut bits = Vec::new();
            for e in [
                montecarlo::estimate_capacity(&p, &c)?,
                montecarlo::estimate_ber(&p, ModulationSpec::CBPSK, &c)?,
                montecarlo::estimate_ser(&p, ModulationSpec::Mpsk { m_order: 8 }, &c)?,
                montecarlo::estimate_moment(&p, 2, &c)?,
            ] {
                bits.extend([e.value.to_bits(), e.std_error.to_bits()]);
            }
            bits.push(montecarlo::sorted_snr(&p, &c)?.iter().fold(0u64, |h, x| h.rotate_left(5) ^ x.to_bits()));
            Ok(bits)
        })
    };
    let v = (|| {
        let reference = run(1)?;
        let mut mismatches = 0usize;
        for threads in [1, 2, 4] {
            mismatches += run(threads)?.iter().zip(&reference).filter(|(a, b)| a != b).count();
        }
        Ok(mismatches as f64)
    })();
    s.record(9, "C9-MC-BITWISE-REPEAT", Bound::Exactly(0.0), v);
}

fn amount_of_fading(s: &mut Section, cfg: &ValidationConfig) {
    for (k, xi) in [1.0, f64::INFINITY].into_iter().enumerate() {
        let tag = xi_tag(xi);
        let m = model(xi, 10.0);
        let v = m.as_ref().map_err(Clone::clone).and_then(|m| Ok(m.af(1)?.abs()));
        s.record(10, format!("C10-AF1-{tag}"), Bound::Exactly(0.0), v);
        let v = m.as_ref().map_err(Clone::clone).and_then(|m| {
            // Moments from the CCDF integral, independent of the closed forms.
            let composed = moment_from_ccdf(m, 2)? / moment_from_ccdf(m, 1)?.powi(2) - 1.0;
            Ok(rel(m.af(2)?, composed))
        });
        s.record(10, format!("C10-AF2-COMPOSITION-{tag}"), Bound::AtMost(tol::AF_COMPOSITION), v);
        let v = z(
            montecarlo::estimate_af(&params(xi, 10.0), 2, &cfg.mc(1000 + k as u64, true)),
            m.as_ref().map_err(Clone::clone).and_then(|m| m.af(2)),
        );
        s.record(10, format!("C10-AF2-MC-{tag}"), Bound::AtMost(tol::SIGMAS), v);
    }
}
