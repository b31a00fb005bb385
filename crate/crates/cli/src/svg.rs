//! Self-contained SVG line chart of a CSV curve.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

pub struct Table {
    pub x_label: String,
    pub x: Vec<f64>,
    pub series: Vec<(String, Vec<f64>)>,
}

fn parse_value(t: &str) -> Result<f64> {
    match t.trim() {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        "nan" => Ok(f64::NAN),
        v => v.parse().with_context(|| format!("bad number {v:?}")),
    }
}

/// Reads a CSV with a header row; standard-error columns are dropped.
pub fn read_table(path: &Path) -> Result<Table> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if headers.len() < 2 {
        bail!("{} needs an x column and at least one series", path.display());
    }
    let mut x = Vec::new();
    let mut cols = vec![Vec::new(); headers.len() - 1];
    for row in reader.records() {
        let row = row?;
        x.push(parse_value(&row[0])?);
        for (c, col) in cols.iter_mut().enumerate() {
            col.push(parse_value(&row[c + 1])?);
        }
    }
    let series = headers[1..]
        .iter()
        .cloned()
        .zip(cols)
        .filter(|(name, _)| !name.ends_with("_std_error"))
        .collect();
    Ok(Table { x_label: headers[0].clone(), x, series })
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    (0..=4).map(|k| lo + (hi - lo) * k as f64 / 4.0).collect()
}

fn label(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{:.3}", v).trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(table: &Table, log_y: Option<bool>) -> Result<String> {
    let points = |ys: &[f64]| -> Vec<(f64, f64)> {
        table.x.iter().zip(ys).filter(|(x, y)| x.is_finite() && y.is_finite()).map(|(&x, &y)| (x, y)).collect()
    };
    let all: Vec<(f64, f64)> = table.series.iter().flat_map(|(_, ys)| points(ys)).collect();
    if all.is_empty() {
        bail!("no finite points to plot");
    }
    let positive = all.iter().all(|p| p.1 > 0.0);
    let (ymin, ymax) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let log_y = log_y.unwrap_or(positive && ymax / ymin > 100.0);
    if log_y && !positive {
        bail!("log y axis needs positive values");
    }
    let fy = |y: f64| if log_y { y.log10() } else { y };
    let (xmin, xmax) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (mut y0, mut y1) = (fy(ymin), fy(ymax));
    if y1 - y0 < 1e-300 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let xspan = if xmax > xmin { xmax - xmin } else { 1.0 };
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let px = |x: f64| LEFT + (x - xmin) / xspan * pw;
    let py = |y: f64| TOP + (1.0 - (fy(y) - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#)?;
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#)?;
    for t in ticks(xmin, xmin + xspan) {
        let x = px(t);
        writeln!(s, r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0)?;
        writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, label(t))?;
    }
    for t in ticks(y0, y1) {
        let y = TOP + (1.0 - (t - y0) / (y1 - y0)) * ph;
        let shown = if log_y { format!("1e{t:.1}") } else { label(t) };
        writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0)?;
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{shown}</text>"#, LEFT - 8.0, y + 4.0)?;
    }
    writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 10.0, escape(&table.x_label))?;
    for (k, (name, ys)) in table.series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = points(ys).iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let dash = if name.ends_with("_mc") { r#" stroke-dasharray="5,3""# } else { "" };
        writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#, path.join(" "))?;
        let ly = TOP + 10.0 + 16.0 * k as f64;
        writeln!(s, r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"{dash}/>"#, WIDTH - RIGHT + 10.0, WIDTH - RIGHT + 30.0)?;
        writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, WIDTH - RIGHT + 36.0, ly + 4.0, escape(name))?;
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_series_and_skips_std_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        std::fs::write(&path, "xi,capacity,capacity_mc,capacity_mc_std_error\n1,2.4,2.41,0.01\n2,2.9,2.9,0.01\ninf,3.1,3.1,0.01\n").unwrap();
        let t = read_table(&path).unwrap();
        assert_eq!(t.series.len(), 2);
        let svg = render(&t, None).unwrap();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("stroke-dasharray"));
        assert!(render(&t, Some(true)).is_ok());
    }
}
