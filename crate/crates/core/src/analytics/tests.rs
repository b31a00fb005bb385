use super::oracles::*;
use super::*;

fn fig2() -> LinkParams {
    LinkParams::new(2.1, 3.5, 1.0, 0.6, 10.0, 10.0).unwrap()
}

fn model(p: LinkParams) -> LinkModel {
    LinkModel::new(p).unwrap()
}

fn rel(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

#[test]
fn kernel_matches_arbitrary_precision_reference() {
    // 40-digit mpmath.meijerg at z = 0.37, α = 2.1, β = 3.5, ξ = 1.
    let m = model(fig2());
    let cfg = QuadratureConfig::default();
    for (g, want) in [
        (&m.ccdf_g, 0.689_252_660_656_127_73),
        (&m.pdf_g, 0.599_734_978_253_969_76),
    ] {
        // The series loses a few digits to cancellation between residue
        // chains whose b-parameters are 0.05 from an integer apart.
        assert!(rel(g.eval(0.37).unwrap(), want) < 1e-11);
        assert!(rel(crate::specfun::meijer_g(g.spec(), 0.37, &cfg).unwrap(), want) < 1e-13);
    }
}

#[test]
fn cdf_limits() {
    for xi in [1.0, 6.7, f64::INFINITY] {
        let m = model(fig2().with_xi(xi));
        assert!(m.cdf(1e-9).unwrap() < 1e-4, "xi = {xi}");
        assert!(m.cdf(1e4).unwrap() > 0.999, "xi = {xi}");
        assert_eq!(m.cdf(0.0).unwrap(), 0.0);
    }
}

#[test]
fn cdf_is_monotone() {
    let m = model(fig2());
    let mut last = 0.0;
    for k in 0..60 {
        let g = 1e-3 * 1.25f64.powi(k);
        let v = m.cdf(g).unwrap();
        assert!(v >= last, "γ = {g}");
        last = v;
    }
}

#[test]
fn pdf_matches_cdf_derivative() {
    for xi in [1.0, 6.7, f64::INFINITY] {
        let m = model(fig2().with_xi(xi));
        for g in [0.05, 0.7, 3.0, 12.0, 40.0] {
            let fd = cdf_derivative(&m, g).unwrap();
            let f = m.pdf(g).unwrap();
            assert!(rel(f, fd) < 1e-6, "xi = {xi}, γ = {g}: pdf {f}, fd {fd}");
        }
    }
}

#[test]
fn pdf_normalized() {
    for xi in [1.0, f64::INFINITY] {
        let mass = pdf_mass(&model(fig2().with_xi(xi))).unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "xi = {xi}: {mass}");
    }
}

#[test]
fn mgf_properties() {
    let m = model(fig2());
    assert_eq!(m.mgf(0.0).unwrap(), 1.0);
    let mut last = 1.0;
    for s in [0.01, 0.1, 1.0, 10.0, 100.0] {
        let v = m.mgf(s).unwrap();
        assert!(v > 0.0 && v <= last, "s = {s}");
        last = v;
        let lt = laplace_transform(&m, s).unwrap();
        assert!(rel(v, lt) < 1e-7, "s = {s}: {v} vs {lt}");
    }
}

#[test]
fn moments_match_ccdf_integral() {
    for xi in [1.0, f64::INFINITY] {
        let m = model(fig2().with_xi(xi));
        for n in [1, 2, 3] {
            let v = m.moment(n).unwrap();
            let o = moment_from_ccdf(&m, n).unwrap();
            assert!(rel(v, o) < 1e-8, "xi = {xi}, n = {n}: {v} vs {o}");
        }
        assert!(m.moment(1).unwrap() <= 10.0);
    }
    assert!(model(fig2()).moment(0).is_err());
}

#[test]
fn amount_of_fading() {
    let m = model(fig2());
    assert_eq!(m.af(1).unwrap(), 0.0);
    let composed = m.moment(2).unwrap() / m.moment(1).unwrap().powi(2) - 1.0;
    assert!(rel(m.af(2).unwrap(), composed) < 1e-12);
    assert!(m.af(2).unwrap() > 0.0);
    let composed3 = m.moment(3).unwrap() / m.moment(1).unwrap().powi(3) - 1.0;
    assert!(rel(m.af(3).unwrap(), composed3) < 1e-12);
}

#[test]
fn ber_zero_snr_limit() {
    for (_, s) in ModulationSpec::NAMED_BINARY {
        let v = model(fig2().with_gbar1(1e-6)).avg_ber_binary(s).unwrap();
        assert!((v - 0.5).abs() < 1e-3, "{s}: {v}");
    }
}

#[test]
fn ber_orderings() {
    let base = LinkParams::new(2.1, 3.5, 6.7, 0.6, 20.0, 20.0).unwrap();
    let m = model(base);
    let cbpsk = m.avg_ber_binary(ModulationSpec::CBPSK).unwrap();
    let nbfsk = m.avg_ber_binary(ModulationSpec::NBFSK).unwrap();
    assert!(cbpsk < nbfsk, "{cbpsk} vs {nbfsk}");

    let mut last = 0.5;
    for db in [0.0, 10.0, 20.0, 30.0] {
        let g = 10f64.powf(db / 10.0);
        let v = model(base.with_gbar1(g).with_gbar2(g)).avg_ber(1.0, 1.0).unwrap();
        assert!(v < last && v > 0.0, "{db} dB");
        last = v;
    }

    let mut last = 0.5;
    for xi in [1.0, 2.0, 6.7] {
        let v = model(base.with_xi(xi)).avg_ber(0.5, 1.0).unwrap();
        assert!(v <= last, "xi = {xi}: {v} > {last}");
        last = v;
    }
}

#[test]
fn two_point_constellations_reduce_to_bpsk() {
    let m = model(fig2());
    let bpsk = m.avg_ber_binary(ModulationSpec::CBPSK).unwrap();
    assert!(rel(m.avg_ser_mpsk(2).unwrap(), bpsk) < 1e-6);
    assert!(rel(m.avg_ser_mam(2).unwrap(), bpsk) < 1e-6);
}

#[test]
fn gcq_agrees_with_adaptive() {
    let m = model(fig2());
    for s in [ModulationSpec::Mpsk { m_order: 8 }, ModulationSpec::Mam { m_order: 4 }, ModulationSpec::Mqam { m_order: 16 }] {
        let g = m.avg_ser_with(s, SerMethod::Gcq).unwrap();
        let a = m.avg_ser_with(s, SerMethod::Adaptive).unwrap();
        assert_eq!(g.method, SerMethod::Gcq);
        assert!(rel(g.value, a.value) < 1e-5, "{s}: {} vs {}", g.value, a.value);
        assert!(g.gcq_change.unwrap() < 1e-8, "{s}: change {:e}", g.gcq_change.unwrap());
    }
}

#[test]
fn ser_orderings() {
    let m = model(fig2());
    assert!(m.avg_ser_mpsk(8).unwrap() >= m.avg_ser_mpsk(4).unwrap());
    let am: Vec<f64> = [2, 4, 8].iter().map(|&k| m.avg_ser_mam(k).unwrap()).collect();
    assert!(am[0] <= am[1] && am[1] <= am[2]);
    assert!(m.avg_ser_mqam(16).unwrap() >= m.avg_ser_mqam(4).unwrap());
    for (k, v) in [(8, m.avg_ser_mpsk(8).unwrap()), (16, m.avg_ser_mqam(16).unwrap())] {
        assert!(v > 0.0 && v < (k as f64 - 1.0) / k as f64);
    }
}

#[test]
fn four_qam_is_qpsk() {
    let m = model(fig2().with_gbar1(100.0).with_gbar2(100.0));
    let qam = m.avg_ser_mqam(4).unwrap();
    let psk = m.avg_ser_mpsk(4).unwrap();
    assert!(rel(qam, psk) < 1e-8, "{qam} vs {psk}");
}

#[test]
fn capacity_oracle_properties() {
    assert!(model(fig2().with_gbar1(1e-6)).capacity_oracle().unwrap() < 1e-5);
    let mut last = 0.0;
    for g in [1.0, 10.0, 100.0] {
        let v = model(fig2().with_gbar1(g)).capacity_oracle().unwrap();
        assert!(v >= last);
        last = v;
    }
}

#[test]
fn capacity_bivariate_matches_oracle() {
    let p = LinkParams::new(2.1, 3.5, 1.0, 0.6, 15.0, 15.0).unwrap();
    for xi in [1.0, f64::INFINITY] {
        let m = model(p.with_xi(xi));
        let c = m.ergodic_capacity().unwrap();
        let o = m.capacity_oracle().unwrap();
        assert!(rel(c, o) < 1e-3, "xi = {xi}: {c} vs {o}");
    }
}

#[test]
fn large_xi_approaches_no_pointing_branch() {
    let a = model(fig2().with_xi(50.0));
    let b = model(fig2().with_xi(f64::INFINITY));
    for g in [1.0, 5.0, 20.0] {
        assert!(rel(a.cdf(g).unwrap(), b.cdf(g).unwrap()) < 1e-2);
        assert!(rel(a.pdf(g).unwrap(), b.pdf(g).unwrap()) < 1e-2);
    }
    assert!(rel(a.mgf(1.0).unwrap(), b.mgf(1.0).unwrap()) < 1e-2);
    assert!(rel(a.moment(2).unwrap(), b.moment(2).unwrap()) < 1e-2);
}

#[test]
fn metric_request() {
    let req = MetricRequest {
        params: fig2(),
        grid: vec![1.0, 10.0, 100.0],
        metric: Metric::ErrorRate(ModulationSpec::DBPSK),
        gbar2_tracks_gbar1: true,
    };
    let v = req.evaluate(&QuadratureConfig::default()).unwrap();
    let direct = model(fig2().with_gbar1(10.0)).avg_ber(1.0, 1.0).unwrap();
    assert_eq!(v[1], direct);
    assert!(v[0] > v[1] && v[1] > v[2]);

    let bad = MetricRequest { grid: vec![2.0, 1.0], ..req.clone() };
    assert!(bad.evaluate(&QuadratureConfig::default()).is_err());
    let bad = MetricRequest { metric: Metric::Moment { n: 0 }, ..req };
    assert!(bad.evaluate(&QuadratureConfig::default()).is_err());
}

#[test]
fn rejects_bad_arguments() {
    let m = model(fig2());
    assert!(m.cdf(-1.0).is_err());
    assert!(m.pdf(0.0).is_err());
    assert!(m.mgf(-0.5).is_err());
    assert!(m.avg_ber(0.0, 1.0).is_err());
    assert!(m.avg_ber_binary(ModulationSpec::Mpsk { m_order: 4 }).is_err());
}
