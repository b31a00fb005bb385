use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use relaylink::validation::{self, ValidationConfig};

mod args;
mod commands;
mod svg;

use args::{Cli, Command, DEFAULT_SEED};
use commands::Kind;

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let (kind, curve_args) = match cli.command {
        Command::Cdf(a) => (Kind::Cdf, a),
        Command::Pdf(a) => (Kind::Pdf, a),
        Command::Mgf(a) => (Kind::Mgf, a),
        Command::Moments(a) => (Kind::Moments, a),
        Command::Af(a) => (Kind::Af, a),
        Command::Ber(a) => (Kind::Ber, a),
        Command::Ser(a) => (Kind::Ser, a),
        Command::Capacity(a) => (Kind::Capacity, a),
        Command::Validate(a) => {
            let samples = a.samples.unwrap_or(1_000_000);
            let cfg = ValidationConfig {
                seed: a.seed.unwrap_or(DEFAULT_SEED),
                samples,
                large_samples: samples.saturating_mul(10),
            };
            let report = validation::run(&cfg);
            write_out(a.out.as_deref(), &report.to_text())?;
            if let Some(path) = &a.csv {
                let curve = report.capacity_vs_xi().context("capacity sweep did not complete")?;
                write_out(Some(path), &curve.to_csv())?;
            }
            for c in report.failures() {
                eprintln!("FAIL {}", c.line());
            }
            return Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
        Command::Svg(a) => {
            let table = svg::read_table(&a.input)?;
            write_out(a.out.as_deref(), &svg::render(&table, a.log_y)?)?;
            return Ok(ExitCode::SUCCESS);
        }
    };
    let settings = args::Settings::resolve(&curve_args)?;
    let curve = commands::build(kind, &settings)?;
    write_out(settings.out.as_deref(), &curve.to_csv())?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
