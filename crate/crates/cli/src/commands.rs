//! Curve commands: analytic columns, optional Monte-Carlo columns.

use anyhow::{bail, Context, Result};
use relaylink::analytics::{LinkModel, Metric, MetricRequest};
use relaylink::curve::Curve;
use relaylink::montecarlo::{self, Estimate, McConfig};
use relaylink::specfun::QuadratureConfig;
use relaylink::{LinkParams, ModulationSpec};

use crate::args::{db_to_linear, parse_grid, GridScale, Over, Settings};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Cdf,
    Pdf,
    Mgf,
    Moments,
    Af,
    Ber,
    Ser,
    Capacity,
}

impl Kind {
    fn over_threshold(self) -> bool {
        matches!(self, Kind::Cdf | Kind::Pdf)
    }
}

fn xi_label(xi: f64) -> String {
    if xi.is_finite() {
        format!("{xi}")
    } else {
        "inf".into()
    }
}

fn mod_label(m: ModulationSpec) -> String {
    m.to_string().replace(':', "")
}

/// One analytic series of the curve and its Monte-Carlo counterpart.
struct Series {
    name: String,
    metric: Metric,
    xi: f64,
}

pub fn build(kind: Kind, s: &Settings) -> Result<Curve> {
    if kind == Kind::Capacity && s.over == Over::Xi {
        return capacity_over_xi(s);
    }
    let scale = s.grid_scale.unwrap_or(if kind.over_threshold() { GridScale::Linear } else { GridScale::Db });
    let default_grid = if kind.over_threshold() { "0.5:40:0.5" } else { "0:40:5" };
    let shown = parse_grid(s.grid.as_deref().unwrap_or(default_grid))?;
    let grid: Vec<f64> = match scale {
        GridScale::Db => shown.iter().map(|&x| db_to_linear(x)).collect(),
        GridScale::Linear => shown.clone(),
    };
    let x_label = match (kind.over_threshold(), scale) {
        (true, GridScale::Linear) => "gamma",
        (true, GridScale::Db) => "gamma_db",
        (false, GridScale::Linear) => "gbar1",
        (false, GridScale::Db) => "gbar1_db",
    };

    let mut curve = Curve::new(x_label, shown);
    for series in series_for(kind, s)? {
        let params = s.base.with_xi(series.xi);
        let request = MetricRequest { params, grid: grid.clone(), metric: series.metric, gbar2_tracks_gbar1: !s.gbar2_fixed };
        let values = request
            .evaluate(&QuadratureConfig::default())
            .with_context(|| format!("evaluating {} at {}", series.name, describe(&params)))?;
        curve.push_column(series.name.clone(), values)?;
        if s.mc {
            let est = grid
                .iter()
                .map(|&x| monte_carlo(&request, x, s))
                .collect::<Result<Vec<_>>>()
                .with_context(|| format!("simulating {} at {}", series.name, describe(&params)))?;
            push_estimates(&mut curve, &series.name, est)?;
        }
    }
    Ok(curve
        .with_meta("alpha", s.base.alpha.to_string())
        .with_meta("beta", s.base.beta.to_string())
        .with_meta("C", s.base.relay_gain_c.to_string()))
}

fn series_for(kind: Kind, s: &Settings) -> Result<Vec<Series>> {
    let mut per_xi: Vec<(String, Metric)> = Vec::new();
    match kind {
        Kind::Cdf => per_xi.push(("cdf".into(), Metric::Cdf)),
        Kind::Pdf => {
            if s.mc {
                bail!("pdf has no Monte-Carlo estimator; use cdf --mc");
            }
            per_xi.push(("pdf".into(), Metric::Pdf));
        }
        Kind::Mgf => per_xi.push((format!("mgf_s{}", s.s), Metric::Mgf { s: s.s })),
        Kind::Moments => {
            let orders = if s.orders.is_empty() { vec![1, 2] } else { s.orders.clone() };
            per_xi.extend(orders.into_iter().map(|n| (format!("moment{n}"), Metric::Moment { n })));
        }
        Kind::Af => {
            let orders = if s.orders.is_empty() { vec![2] } else { s.orders.clone() };
            per_xi.extend(orders.into_iter().map(|n| (format!("af{n}"), Metric::Af { n })));
        }
        Kind::Ber => {
            let mods = if s.modulations.is_empty() {
                ModulationSpec::NAMED_BINARY.iter().map(|(_, m)| *m).collect()
            } else {
                s.modulations.clone()
            };
            for m in mods {
                if !m.is_binary() {
                    bail!("ber takes binary schemes; use ser for {m}");
                }
                per_xi.push((format!("ber_{}", mod_label(m)), Metric::ErrorRate(m)));
            }
        }
        Kind::Ser => {
            let mods = if s.modulations.is_empty() { vec![ModulationSpec::Mpsk { m_order: 8 }] } else { s.modulations.clone() };
            for m in mods {
                if m.is_binary() {
                    bail!("ser takes M-ary schemes; use ber for {m}");
                }
                per_xi.push((format!("ser_{}", mod_label(m)), Metric::ErrorRate(m)));
            }
        }
        Kind::Capacity => per_xi.push(("capacity".into(), Metric::Capacity)),
    }
    let mut out = Vec::new();
    for (name, metric) in per_xi {
        for &xi in &s.xis {
            out.push(Series { name: format!("{name}_xi{}", xi_label(xi)), metric, xi });
        }
    }
    Ok(out)
}

fn monte_carlo(request: &MetricRequest, x: f64, s: &Settings) -> Result<Estimate> {
    let cfg = McConfig::new(s.samples, s.seed);
    let mut p = request.params;
    if !request.metric.grid_is_threshold() {
        p = p.with_gbar1(x);
        if request.gbar2_tracks_gbar1 {
            p = p.with_gbar2(x);
        }
    }
    let est = match request.metric {
        Metric::Cdf => montecarlo::empirical_cdf(&p, &[x], &cfg)?.remove(0),
        Metric::Mgf { s } => montecarlo::estimate_mean_of(&p, &cfg, |g| (-s * g).exp())?,
        Metric::Moment { n } => montecarlo::estimate_moment(&p, n, &cfg)?,
        Metric::Af { n } => montecarlo::estimate_af(&p, n, &cfg)?,
        Metric::ErrorRate(m) if m.is_binary() => montecarlo::estimate_ber(&p, m, &cfg)?,
        Metric::ErrorRate(m) => montecarlo::estimate_ser(&p, m, &cfg)?,
        Metric::Capacity | Metric::CapacityOracle => montecarlo::estimate_capacity(&p, &cfg)?,
        Metric::Pdf => bail!("pdf has no Monte-Carlo estimator"),
    };
    Ok(est)
}

fn push_estimates(curve: &mut Curve, name: &str, est: Vec<Estimate>) -> Result<()> {
    curve.push_column(format!("{name}_mc"), est.iter().map(|e| e.value).collect())?;
    curve.push_column(format!("{name}_mc_std_error"), est.iter().map(|e| e.std_error).collect())?;
    Ok(())
}

fn capacity_over_xi(s: &Settings) -> Result<Curve> {
    let mut xs = s.xis.clone();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut analytic = Vec::new();
    let mut oracle = Vec::new();
    let mut mc = Vec::new();
    for &xi in &xs {
        let p = s.base.with_xi(xi);
        let model = LinkModel::new(p)?;
        analytic.push(model.ergodic_capacity().with_context(|| format!("capacity at {}", describe(&p)))?);
        oracle.push(model.capacity_oracle().with_context(|| format!("capacity oracle at {}", describe(&p)))?);
        if s.mc {
            mc.push(montecarlo::estimate_capacity(&p, &McConfig::new(s.samples, s.seed))?);
        }
    }
    let mut curve = Curve::new("xi", xs);
    curve.push_column("capacity", analytic)?;
    curve.push_column("capacity_oracle", oracle)?;
    if s.mc {
        curve.push_column("capacity_mc", mc.iter().map(|e| e.value).collect())?;
        curve.push_column("capacity_mc_std_error", mc.iter().map(|e| e.std_error).collect())?;
    }
    Ok(curve.with_meta("gbar1_db", format!("{}", 10.0 * s.base.gbar1.log10())))
}

fn describe(p: &LinkParams) -> String {
    format!(
        "alpha = {}, beta = {}, xi = {}, C = {}, gbar1 = {}, gbar2 = {}",
        p.alpha,
        p.beta,
        xi_label(p.xi),
        p.relay_gain_c,
        p.gbar1,
        p.gbar2
    )
}
