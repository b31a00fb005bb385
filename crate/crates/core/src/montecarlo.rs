//! Monte-Carlo estimators of the end-to-end SNR statistics.
//!
//! Draws are split into a fixed number of batches. Batch `b` uses the
//! ChaCha8 stream `b` keyed by the master seed, so every batch can run on any
//! worker and the reduction, done in batch order, is bitwise reproducible.
//! Standard errors come from the spread of the batch means.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Open01};
use rayon::prelude::*;

use crate::channel::{
    conditional_ber, FsoSampler, GainNormalization, LinkParams, LinkSampler, ModulationSpec,
};
use crate::error::{invalid, Context, Error, Result};
use crate::specfun::{regularized_upper_gamma, GcqRule};

/// Streams at or above this offset feed auxiliary randomness (coin flips)
/// so they never overlap the SNR streams.
const AUX_STREAM: u64 = 1 << 32;

/// Nodes of the per-draw Chebyshev–Gauss rule for M-PSK without a closed form.
const PSK_NODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub batches: u32,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { samples: 1_000_000, seed: 0x5eed_2013, batches: 32 }
    }
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self { samples, seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batches < 2 || self.samples < self.batches as u64 {
            return Err(invalid(format!(
                "Monte-Carlo needs samples >= batches >= 2, got samples = {}, batches = {}",
                self.samples, self.batches
            )));
        }
        Ok(())
    }

    fn batch_len(&self, b: u32) -> u64 {
        let base = self.samples / self.batches as u64;
        base + u64::from((b as u64) < self.samples % self.batches as u64)
    }
}

/// A Monte-Carlo estimate with its batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

impl Estimate {
    /// (value − reference)/std_error; infinite when the error is zero but
    /// the values differ.
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = self.value - reference;
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }

    pub fn within(&self, reference: f64, sigmas: f64) -> bool {
        self.z_score(reference).abs() <= sigmas
    }
}

fn batch_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `f(rng, n)` for every batch; results come back in batch order.
fn map_batches<T, F>(cfg: &McConfig, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64, u32) -> T + Sync,
{
    (0..cfg.batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(cfg.seed, b as u64);
            f(&mut rng, cfg.batch_len(b), b)
        })
        .collect()
}

fn from_batch_sums(cfg: &McConfig, sums: &[(f64, u64)]) -> Estimate {
    let total: f64 = sums.iter().map(|s| s.0).sum();
    let n: u64 = sums.iter().map(|s| s.1).sum();
    let value = total / n as f64;
    let k = sums.len() as f64;
    let spread: f64 = sums.iter().map(|&(s, m)| (s / m as f64 - value).powi(2)).sum();
    Estimate {
        value,
        std_error: (spread / (k * (k - 1.0))).sqrt(),
        samples: n,
        seed: cfg.seed,
    }
}

fn checked(est: Estimate, what: &str) -> Result<Estimate> {
    if est.value.is_finite() && est.std_error.is_finite() {
        Ok(est)
    } else {
        Err(invalid(format!("{what}: non-finite estimate {est:?}")))
    }
}

/// Sample mean of h(γ) over end-to-end SNR draws.
pub fn estimate_mean_of<H>(params: &LinkParams, cfg: &McConfig, h: H) -> Result<Estimate>
where
    H: Fn(f64) -> f64 + Sync,
{
    cfg.validate()?;
    let sampler = LinkSampler::new(params)?;
    let sums = map_batches(cfg, |rng, n, _| {
        let mut s = 0.0;
        for _ in 0..n {
            s += h(sampler.sample(rng));
        }
        (s, n)
    });
    Ok(from_batch_sums(cfg, &sums))
}

/// All end-to-end SNR draws, in batch order.
pub fn sample_snr(params: &LinkParams, cfg: &McConfig) -> Result<Vec<f64>> {
    sample_snr_with(params, GainNormalization::default(), cfg)
}

/// [`sample_snr`] under an explicit optical gain normalization.
pub fn sample_snr_with(params: &LinkParams, norm: GainNormalization, cfg: &McConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let sampler = LinkSampler::with_normalization(params, norm)?;
    let parts = map_batches(cfg, |rng, n, _| (0..n).map(|_| sampler.sample(rng)).collect::<Vec<_>>());
    Ok(parts.concat())
}

/// All end-to-end SNR draws, sorted ascending.
pub fn sorted_snr(params: &LinkParams, cfg: &McConfig) -> Result<Vec<f64>> {
    let mut v = sample_snr(params, cfg)?;
    v.par_sort_unstable_by(f64::total_cmp);
    Ok(v)
}

/// Sorted draws of the optical-hop SNR alone.
pub fn sorted_fso_snr(params: &LinkParams, cfg: &McConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let sampler = FsoSampler::new(params, GainNormalization::default())?;
    let parts = map_batches(cfg, |rng, n, _| (0..n).map(|_| sampler.sample(rng)).collect::<Vec<_>>());
    let mut v = parts.concat();
    v.par_sort_unstable_by(f64::total_cmp);
    Ok(v)
}

/// Fraction of draws at or below each grid point, with binomial standard
/// errors.
pub fn empirical_cdf(params: &LinkParams, grid: &[f64], cfg: &McConfig) -> Result<Vec<Estimate>> {
    cfg.validate()?;
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("empirical CDF grid must be nonempty and strictly increasing"));
    }
    let sampler = LinkSampler::new(params)?;
    let counts = map_batches(cfg, |rng, n, _| {
        // counts[i] = draws falling in (grid[i−1], grid[i]]
        let mut counts = vec![0u64; grid.len() + 1];
        for _ in 0..n {
            let g = sampler.sample(rng);
            counts[grid.partition_point(|&x| x < g)] += 1;
        }
        counts
    });
    let n = cfg.samples as f64;
    let mut below = 0u64;
    Ok((0..grid.len())
        .map(|i| {
            below += counts.iter().map(|c| c[i]).sum::<u64>();
            let f = below as f64 / n;
            Estimate {
                value: f,
                std_error: (f * (1.0 - f) / n).sqrt(),
                samples: cfg.samples,
                seed: cfg.seed,
            }
        })
        .collect())
}

fn binary_pq(m: ModulationSpec) -> Result<(f64, f64)> {
    match m {
        ModulationSpec::Binary { p, q } => {
            m.validate()?;
            Ok((p, q))
        }
        other => Err(invalid(format!("{other} is not a binary modulation"))),
    }
}

/// Semi-analytic BER: the mean of Γ(p, qγ)/(2Γ(p)) over γ draws.
pub fn estimate_ber(params: &LinkParams, m: ModulationSpec, cfg: &McConfig) -> Result<Estimate> {
    let (p, q) = binary_pq(m)?;
    let est = estimate_mean_of(params, cfg, |g| conditional_ber(p, q, g).unwrap_or(f64::NAN))?;
    checked(est, "semi-analytic BER")
}

/// Bit-level BER: one Bernoulli(P_b(γ)) error indicator per draw.
pub fn estimate_ber_direct(params: &LinkParams, m: ModulationSpec, cfg: &McConfig) -> Result<Estimate> {
    let (p, q) = binary_pq(m)?;
    cfg.validate()?;
    let sampler = LinkSampler::new(params)?;
    let sums = map_batches(cfg, |rng, n, b| {
        let mut coins = batch_rng(cfg.seed, AUX_STREAM + b as u64);
        let mut errors = 0u64;
        for _ in 0..n {
            let pb = conditional_ber(p, q, sampler.sample(rng)).unwrap_or(f64::NAN);
            let u: f64 = Open01.sample(&mut coins);
            errors += u64::from(u < pb);
        }
        (errors as f64, n)
    });
    checked(from_batch_sums(cfg, &sums), "bit-level BER")
}

/// Q(x) = P(N(0,1) > x) = erfc(x/√2)/2 for x ≥ 0.
fn gaussian_q(x: f64) -> f64 {
    0.5 * regularized_upper_gamma(0.5, 0.5 * x * x).unwrap_or(f64::NAN)
}

/// Conditional symbol error probability of an M-ary scheme at SNR γ.
#[derive(Debug, Clone)]
pub struct ConditionalSer {
    modulation: ModulationSpec,
    psk_rule: Option<(GcqRule, f64)>,
}

impl ConditionalSer {
    pub fn new(m: ModulationSpec) -> Result<Self> {
        m.validate()?;
        let psk_rule = match m {
            ModulationSpec::Mpsk { m_order } if m_order != 2 && m_order != 4 => {
                let mf = m_order as f64;
                let rule = GcqRule::new(0.0, (mf - 1.0) * PI / mf, PSK_NODES)
                    .context(|| "PSK quadrature rule".into())?;
                Some((rule, (PI / mf).sin().powi(2)))
            }
            ModulationSpec::Binary { .. } => {
                return Err(invalid("binary schemes use the conditional BER"));
            }
            _ => None,
        };
        Ok(Self { modulation: m, psk_rule })
    }

    pub fn eval(&self, gamma: f64) -> f64 {
        match self.modulation {
            ModulationSpec::Mpsk { m_order: 2 } => gaussian_q((2.0 * gamma).sqrt()),
            ModulationSpec::Mpsk { m_order: 4 } => {
                let q = gaussian_q(gamma.sqrt());
                2.0 * q - q * q
            }
            ModulationSpec::Mpsk { .. } => {
                let (rule, g) = self.psk_rule.as_ref().expect("rule built for M other than 2 and 4");
                rule.apply(|phi| (-gamma * g / phi.sin().powi(2)).exp()).unwrap_or(f64::NAN) / PI
            }
            ModulationSpec::Mam { m_order } => {
                let mf = m_order as f64;
                2.0 * (mf - 1.0) / mf * gaussian_q((6.0 * gamma / (mf * mf - 1.0)).sqrt())
            }
            ModulationSpec::Mqam { m_order } => {
                let mf = m_order as f64;
                let r = 1.0 - 1.0 / mf.sqrt();
                let q = gaussian_q((3.0 * gamma / (mf - 1.0)).sqrt());
                4.0 * r * q - 4.0 * r * r * q * q
            }
            ModulationSpec::Binary { .. } => unreachable!(),
        }
    }
}

/// Semi-analytic SER: the mean of the conditional SEP over γ draws. Binary
/// schemes fall through to [`estimate_ber`].
pub fn estimate_ser(params: &LinkParams, m: ModulationSpec, cfg: &McConfig) -> Result<Estimate> {
    if m.is_binary() {
        return estimate_ber(params, m, cfg);
    }
    let cond = ConditionalSer::new(m)?;
    checked(estimate_mean_of(params, cfg, |g| cond.eval(g))?, "semi-analytic SER")
}

/// Sample mean of log₂(1 + γ).
pub fn estimate_capacity(params: &LinkParams, cfg: &McConfig) -> Result<Estimate> {
    estimate_mean_of(params, cfg, |g| g.ln_1p() / std::f64::consts::LN_2)
}

/// Sample mean of γⁿ.
pub fn estimate_moment(params: &LinkParams, n: u32, cfg: &McConfig) -> Result<Estimate> {
    if n == 0 {
        return Err(invalid("moment order must be >= 1"));
    }
    if n >= 3 {
        log::warn!("Monte-Carlo moment of order {n}: heavy-tailed summands, expect a wide interval");
    }
    estimate_mean_of(params, cfg, |g| g.powi(n as i32))
}

/// E[γⁿ]/E[γ]ⁿ − 1 from the pooled draws; the standard error is the spread
/// of the per-batch ratios.
pub fn estimate_af(params: &LinkParams, n: u32, cfg: &McConfig) -> Result<Estimate> {
    if n == 0 {
        return Err(invalid("amount-of-fading order must be >= 1"));
    }
    cfg.validate()?;
    let sampler = LinkSampler::new(params)?;
    let sums = map_batches(cfg, |rng, len, _| {
        let (mut s1, mut sn) = (0.0, 0.0);
        for _ in 0..len {
            let g = sampler.sample(rng);
            s1 += g;
            sn += g.powi(n as i32);
        }
        (s1, sn, len)
    });
    let af = |s1: f64, sn: f64, len: f64| (sn / len) / (s1 / len).powi(n as i32) - 1.0;
    let (s1, sn, len) = sums
        .iter()
        .fold((0.0, 0.0, 0u64), |acc, s| (acc.0 + s.0, acc.1 + s.1, acc.2 + s.2));
    let value = af(s1, sn, len as f64);
    let k = sums.len() as f64;
    let per_batch: Vec<f64> = sums.iter().map(|&(a, b, m)| af(a, b, m as f64)).collect();
    let mean_b = per_batch.iter().sum::<f64>() / k;
    let spread: f64 = per_batch.iter().map(|v| (v - mean_b).powi(2)).sum();
    checked(
        Estimate {
            value,
            std_error: (spread / (k * (k - 1.0))).sqrt(),
            samples: len,
            seed: cfg.seed,
        },
        "amount of fading",
    )
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `sorted` and
/// `cdf`, taken over the draw points.
pub fn ks_distance<F>(sorted: &[f64], mut cdf: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if sorted.is_empty() {
        return Err(invalid("KS distance needs at least one draw"));
    }
    if sorted.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("KS distance needs sorted draws"));
    }
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x)?;
        let i = i as f64;
        d = d.max((i + 1.0) / n - f).max(f - i / n);
    }
    Ok(d)
}

/// Two-sample Kolmogorov–Smirnov distance between sorted draw sets.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid("KS distance needs at least one draw per sample"));
    }
    if a.windows(2).chain(b.windows(2)).any(|w| w[1] < w[0]) {
        return Err(invalid("KS distance needs sorted draws"));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// [`ks_distance`] with the analytic CDF evaluated in parallel chunks.
pub fn ks_distance_par<F>(sorted: &[f64], cdf: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if sorted.is_empty() {
        return Err(invalid("KS distance needs at least one draw"));
    }
    let n = sorted.len() as f64;
    let chunk = 4096;
    let parts: Vec<Result<f64>> = sorted
        .par_chunks(chunk)
        .enumerate()
        .map(|(c, xs)| {
            let mut d = 0.0f64;
            for (j, &x) in xs.iter().enumerate() {
                let i = (c * chunk + j) as f64;
                let f = cdf(x)?;
                d = d.max((i + 1.0) / n - f).max(f - i / n);
            }
            Ok(d)
        })
        .collect();
    parts.into_iter().try_fold(0.0f64, |acc, d| Ok::<f64, Error>(acc.max(d?)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> LinkParams {
        LinkParams::new(2.1, 3.5, 1.0, 0.6, 10.0, 10.0).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(McConfig { samples: 10, seed: 0, batches: 1 }.validate().is_err());
        assert!(McConfig { samples: 5, seed: 0, batches: 8 }.validate().is_err());
        let c = McConfig { samples: 100, seed: 0, batches: 7 };
        assert_eq!((0..7).map(|b| c.batch_len(b)).sum::<u64>(), 100);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let cfg = McConfig::new(20_000, 42);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_capacity(&fig2(), &cfg).unwrap())
        };
        let a = run(1);
        let b = run(3);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        assert_eq!(a.seed, 42);
        assert_ne!(estimate_capacity(&fig2(), &McConfig::new(20_000, 43)).unwrap(), a);
    }

    #[test]
    fn empirical_cdf_edges() {
        let cfg = McConfig::new(100_000, 1);
        let est = empirical_cdf(&fig2(), &[0.0, 5.0, 1e4], &cfg).unwrap();
        assert_eq!(est[0].value, 0.0);
        assert!(est[2].value >= 0.999);
        assert!(est[1].value > 0.0 && est[1].value < 1.0);
        assert!(empirical_cdf(&fig2(), &[2.0, 1.0], &cfg).is_err());
    }

    #[test]
    fn mean_snr_bounded_by_rf_mean() {
        let e = estimate_moment(&fig2(), 1, &McConfig::new(200_000, 5)).unwrap();
        assert!(e.value <= 10.0 + 3.0 * e.std_error);
    }

    #[test]
    fn zero_snr_limits() {
        let p = fig2().with_gbar1(1e-6);
        let cfg = McConfig::new(50_000, 9);
        assert!((estimate_ber(&p, ModulationSpec::DBPSK, &cfg).unwrap().value - 0.5).abs() < 1e-3);
        assert!(estimate_capacity(&p, &cfg).unwrap().value < 1e-5);
    }

    #[test]
    fn std_error_scales_as_inverse_root() {
        let small = estimate_capacity(&fig2(), &McConfig::new(100_000, 3)).unwrap();
        let large = estimate_capacity(&fig2(), &McConfig::new(400_000, 3)).unwrap();
        let ratio = small.std_error / large.std_error;
        assert!((ratio / 2.0 - 1.0).abs() < 0.2 * 2.0, "ratio {ratio}");
    }

    #[test]
    fn direct_and_semi_analytic_ber_agree() {
        let p = fig2().with_gbar1(2.0).with_gbar2(2.0);
        let cfg = McConfig::new(200_000, 8);
        let a = estimate_ber(&p, ModulationSpec::DBPSK, &cfg).unwrap();
        let b = estimate_ber_direct(&p, ModulationSpec::DBPSK, &cfg).unwrap();
        let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!((a.value - b.value).abs() < 3.0 * se, "{a:?} vs {b:?}");
    }

    #[test]
    fn conditional_ser_forms() {
        // BPSK and two-level AM are the same constellation.
        let psk2 = ConditionalSer::new(ModulationSpec::Mpsk { m_order: 2 }).unwrap();
        let am2 = ConditionalSer::new(ModulationSpec::Mam { m_order: 2 }).unwrap();
        let qam4 = ConditionalSer::new(ModulationSpec::Mqam { m_order: 4 }).unwrap();
        let psk4 = ConditionalSer::new(ModulationSpec::Mpsk { m_order: 4 }).unwrap();
        for g in [0.1, 1.0, 7.0] {
            assert!((psk2.eval(g) - am2.eval(g)).abs() < 1e-15);
            assert!((qam4.eval(g) - psk4.eval(g)).abs() < 1e-15);
            assert!((psk2.eval(g) - conditional_ber(0.5, 1.0, g).unwrap()).abs() < 1e-15);
        }
        // The quadrature form reproduces the closed QPSK form. e^{−c/sin²φ} is
        // flat but not analytic at φ = 0, so the rule converges sub-geometrically.
        let quad4 = ConditionalSer { modulation: ModulationSpec::Mpsk { m_order: 4 }, psk_rule: None };
        let mf = 4.0f64;
        let rule = GcqRule::new(0.0, 3.0 * PI / mf, PSK_NODES).unwrap();
        for g in [0.1, 1.0, 7.0, 30.0] {
            let v = rule.apply(|phi| (-g * 0.5 / phi.sin().powi(2)).exp()).unwrap() / PI;
            assert!((v - quad4.eval(g)).abs() < 1e-8, "γ = {g}: {v} vs {}", quad4.eval(g));
        }
        assert!(ConditionalSer::new(ModulationSpec::DBPSK).is_err());
    }

    #[test]
    fn ks_distance_examples() {
        let xs: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let step = |x: f64| Ok(x / 10.0);
        assert!(ks_distance(&xs, step).unwrap() <= 0.1 + 1e-15);
        assert!(ks_distance(&[], step).is_err());
        assert!(ks_distance(&[2.0, 1.0], step).is_err());
        assert_eq!(ks_two_sample(&xs, &xs).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert!((ks_two_sample(&[1.0, 3.0], &[2.0, 4.0]).unwrap() - 0.5).abs() < 1e-15);

        use rand_distr::Exp1;
        let mut rng = batch_rng(17, 0);
        let mut draws: Vec<f64> = (0..1_000_000).map(|_| Exp1.sample(&mut rng)).collect();
        draws.sort_by(f64::total_cmp);
        let d = ks_distance_par(&draws, |x: f64| Ok(1.0 - (-x).exp())).unwrap();
        assert!(d <= 0.0017, "{d}");
        let d2 = ks_distance(&draws, |x: f64| Ok(1.0 - (-x).exp())).unwrap();
        assert_eq!(d, d2);
    }
}
