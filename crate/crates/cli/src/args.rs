//! Command-line flags, the JSON config file, and their merge.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use relaylink::{LinkParams, ModulationSpec};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "relaylink", version, about = "Mixed RF/FSO fixed-gain relay link performance curves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// CDF of the end-to-end SNR over a threshold grid.
    Cdf(CurveArgs),
    /// PDF of the end-to-end SNR over a threshold grid.
    Pdf(CurveArgs),
    /// MGF E[exp(-s γ)] at fixed s over an average-SNR grid.
    Mgf(CurveArgs),
    /// Raw moments E[γ^n] over an average-SNR grid.
    Moments(CurveArgs),
    /// Amount of fading of order n over an average-SNR grid.
    Af(CurveArgs),
    /// Average BER of binary schemes over an average-SNR grid.
    Ber(CurveArgs),
    /// Average SER of M-ary schemes over an average-SNR grid.
    Ser(CurveArgs),
    /// Ergodic capacity over an average-SNR grid or over the listed xi values.
    Capacity(CurveArgs),
    /// Full acceptance report; exits nonzero if any check fails.
    Validate(ValidateArgs),
    /// Minimal SVG line chart of a CSV written by this tool.
    Svg(SvgArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    Db,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Over {
    Gbar1,
    Xi,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CurveArgs {
    /// Turbulence parameter alpha [default: 2.1].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Turbulence parameter beta [default: 3.5].
    #[arg(long)]
    pub beta: Option<f64>,
    /// Pointing-error ratio(s), comma separated; "inf" means no pointing error [default: 1].
    #[arg(long, value_delimiter = ',')]
    pub xi: Vec<String>,
    /// Fixed relay gain constant C [default: 0.6].
    #[arg(long)]
    pub relay_c: Option<f64>,
    /// Average RF-hop SNR in dB, used where the grid does not sweep it [default: 10].
    #[arg(long)]
    pub gbar1_db: Option<f64>,
    /// Average optical-hop SNR in dB; when absent it follows the RF hop.
    #[arg(long)]
    pub gbar2_db: Option<f64>,
    /// Grid as start:stop:step, stop included.
    #[arg(long)]
    pub grid: Option<String>,
    /// Units of the grid [default: linear for cdf/pdf, db otherwise].
    #[arg(long, value_enum)]
    pub grid_scale: Option<GridScale>,
    /// Capacity sweep variable [default: gbar1].
    #[arg(long, value_enum)]
    pub over: Option<Over>,
    /// Modulation(s), comma separated: cbfsk, cbpsk, nbfsk, dbpsk, binary:p:q, mpsk:M, mam:M, mqam:M.
    #[arg(long, value_delimiter = ',')]
    pub modulation: Vec<String>,
    /// Moment or amount-of-fading order(s), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub order: Vec<u32>,
    /// MGF argument s [default: 1].
    #[arg(long)]
    pub s: Option<f64>,
    /// Add Monte-Carlo columns with standard errors.
    #[arg(long)]
    pub mc: bool,
    /// Monte-Carlo draws per grid point [default: 1000000].
    #[arg(long)]
    pub samples: Option<u64>,
    /// Monte-Carlo seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with any of the settings above; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// Draws for KS, BER and SER checks; moment, capacity and AF checks use ten times as many [default: 1000000].
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Path for the capacity-vs-xi CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SvgArgs {
    /// CSV written by one of the curve commands.
    #[arg(long)]
    pub input: PathBuf,
    /// SVG path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Logarithmic y axis; by default chosen when all values are positive and span over two decades.
    #[arg(long)]
    pub log_y: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum XiValue {
    Number(f64),
    Text(String),
}

/// Settings file; every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    alpha: Option<f64>,
    beta: Option<f64>,
    xi: Option<Vec<XiValue>>,
    relay_c: Option<f64>,
    gbar1_db: Option<f64>,
    gbar2_db: Option<f64>,
    grid: Option<String>,
    grid_scale: Option<GridScale>,
    over: Option<Over>,
    modulation: Option<Vec<String>>,
    order: Option<Vec<u32>>,
    s: Option<f64>,
    mc: Option<bool>,
    samples: Option<u64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

pub const DEFAULT_SEED: u64 = 20_130_905;

/// Flags merged over the config file, with defaults filled in.
#[derive(Debug, Clone)]
pub struct Settings {
    pub base: LinkParams,
    pub xis: Vec<f64>,
    /// ḡ₂ follows ḡ₁ when no optical-hop SNR was given.
    pub gbar2_fixed: bool,
    pub grid: Option<String>,
    pub grid_scale: Option<GridScale>,
    pub over: Over,
    pub modulations: Vec<ModulationSpec>,
    pub orders: Vec<u32>,
    pub s: f64,
    pub mc: bool,
    pub samples: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

pub fn parse_xi(text: &str) -> Result<f64> {
    let t = text.trim().to_ascii_lowercase();
    if matches!(t.as_str(), "inf" | "infinity" | "+inf") {
        return Ok(f64::INFINITY);
    }
    let v: f64 = t.parse().with_context(|| format!("bad xi value {text:?}"))?;
    if !(v > 0.0) {
        bail!("xi must be positive or \"inf\", got {text:?}");
    }
    Ok(v)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl Settings {
    pub fn resolve(args: &CurveArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                serde_json::from_str::<ConfigFile>(&text)
                    .with_context(|| format!("parsing config {}", path.display()))?
            }
            None => ConfigFile::default(),
        };

        let xis = if !args.xi.is_empty() {
            args.xi.iter().map(|t| parse_xi(t)).collect::<Result<Vec<_>>>()?
        } else if let Some(list) = &file.xi {
            list.iter()
                .map(|v| match v {
                    XiValue::Number(x) => parse_xi(&x.to_string()),
                    XiValue::Text(t) => parse_xi(t),
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            vec![1.0]
        };
        if xis.is_empty() {
            bail!("at least one xi value is required");
        }

        let modulations = if !args.modulation.is_empty() {
            args.modulation.clone()
        } else {
            file.modulation.clone().unwrap_or_default()
        };
        let modulations = modulations
            .iter()
            .map(|m| m.parse::<ModulationSpec>().map_err(anyhow::Error::from))
            .collect::<Result<Vec<_>>>()?;

        let gbar1_db = args.gbar1_db.or(file.gbar1_db).unwrap_or(10.0);
        let gbar2_db = args.gbar2_db.or(file.gbar2_db);
        let base = LinkParams::new(
            args.alpha.or(file.alpha).unwrap_or(2.1),
            args.beta.or(file.beta).unwrap_or(3.5),
            xis[0],
            args.relay_c.or(file.relay_c).unwrap_or(0.6),
            db_to_linear(gbar1_db),
            db_to_linear(gbar2_db.unwrap_or(gbar1_db)),
        )
        .context("invalid link parameters")?;

        let orders = if !args.order.is_empty() { args.order.clone() } else { file.order.clone().unwrap_or_default() };
        let samples = args.samples.or(file.samples).unwrap_or(1_000_000);
        Ok(Self {
            base,
            xis,
            gbar2_fixed: gbar2_db.is_some(),
            grid: args.grid.clone().or(file.grid),
            grid_scale: args.grid_scale.or(file.grid_scale),
            over: args.over.or(file.over).unwrap_or(Over::Gbar1),
            modulations,
            orders,
            s: args.s.or(file.s).unwrap_or(1.0),
            mc: args.mc || file.mc.unwrap_or(false),
            samples,
            seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            out: args.out.clone().or(file.out),
        })
    }
}

/// Parses `start:stop:step`; the stop value is included when the steps
/// land on it.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        bail!("grid {text:?} is not start:stop:step");
    };
    let num = |t: &str| -> Result<f64> {
        let v: f64 = t.trim().parse().with_context(|| format!("bad number {t:?} in grid {text:?}"))?;
        if !v.is_finite() {
            bail!("grid {text:?} has a non-finite entry");
        }
        Ok(v)
    };
    let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
    if !(step > 0.0) || stop < start {
        bail!("grid {text:?} needs step > 0 and stop >= start");
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        bail!("grid {text:?} has {count} points; the limit is 100000");
    }
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}
