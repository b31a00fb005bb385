//! Tabulated metric curves and their CSV form.

use std::fmt::Write as _;

use crate::error::{invalid, Result};

/// Formats one CSV number: 12 significant digits in scientific notation,
/// `inf`/`-inf`/`nan` for non-finite values.
pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// An x-grid with any number of named y-columns of the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub x_label: String,
    pub x: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
    /// Free-form key/value annotations (parameter set, seed, ...); not part of
    /// the CSV body.
    pub metadata: Vec<(String, String)>,
}

impl Curve {
    pub fn new(x_label: impl Into<String>, x: Vec<f64>) -> Self {
        Self { x_label: x_label.into(), x, columns: Vec::new(), metadata: Vec::new() }
    }

    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.x.len() {
            return Err(invalid(format!(
                "column {name} has {} values for a grid of {}",
                values.len(),
                self.x.len()
            )));
        }
        if name.contains(',') || self.columns.iter().any(|(n, _)| *n == name) || name == self.x_label {
            return Err(invalid(format!("column name {name:?} is not a unique CSV field")));
        }
        self.columns.push((name, values));
        Ok(())
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata.push((key.into(), value.into()));
        self
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    /// Header row plus one row per grid point, `\n`-terminated.
    pub fn to_csv(&self) -> String {
        let mut out = self.x_label.clone();
        for (name, _) in &self.columns {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (i, &x) in self.x.iter().enumerate() {
            out.push_str(&format_number(x));
            for (_, v) in &self.columns {
                let _ = write!(out, ",{}", format_number(v[i]));
            }
            out.push('\n');
        }
        out
    }
}
