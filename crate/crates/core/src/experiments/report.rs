use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::besov::InequalityReport;
use crate::error::{Error, Result};

/// A rectangular table of scalars with named columns.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Records {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Records {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            // `{:e}` is the shortest representation that parses back exactly.
            w.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }
}

/// The norms of the datum and the velocity that every right-hand side is built from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RateBoundInputs {
    pub linf0: f64,
    pub besov0: f64,
    /// `∫₀ᵗ ‖∇u‖_{L^p} ds`.
    pub grad_integral: f64,
    /// `G^a ‖θ₀‖_∞ + ‖θ₀‖_{B^{log,a}}`.
    pub lambda: f64,
}

impl RateBoundInputs {
    pub fn new(linf0: f64, besov0: f64, grad_integral: f64, a: f64) -> Self {
        Self { linf0, besov0, grad_integral, lambda: grad_integral.powf(a) * linf0 + besov0 }
    }

    pub fn at(&self, grad_integral: f64, a: f64) -> Self {
        Self::new(self.linf0, self.besov0, grad_integral, a)
    }
}

/// One inequality `lhs ≤ C rhs` evaluated at a named point, with all of its inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub min_constant: f64,
    pub inputs: BTreeMap<String, f64>,
}

impl BoundCheck {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, inputs: impl IntoIterator<Item = (&'static str, f64)>) -> Self {
        Self::from_report(name, InequalityReport::new(lhs, rhs, inputs))
    }

    pub fn from_report(name: impl Into<String>, r: InequalityReport) -> Self {
        Self { name: name.into(), lhs: r.lhs, rhs: r.rhs, min_constant: r.min_constant, inputs: r.inputs }
    }

    pub fn holds_with(&self, c: f64) -> bool {
        self.lhs <= c * self.rhs * (1.0 + 1e-12)
    }
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

impl RateFit {
    pub fn ols(name: impl Into<String>, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch(format!("{} abscissae for {} ordinates", x.len(), y.len())));
        }
        if x.len() < 2 || x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("a fit needs at least two finite points".into()));
        }
        let m = x.len() as f64;
        let xm = x.iter().sum::<f64>() / m;
        let ym = y.iter().sum::<f64>() / m;
        let sxx: f64 = x.iter().map(|v| (v - xm).powi(2)).sum();
        if sxx == 0.0 {
            return Err(Error::InvalidParameter("a fit needs distinct abscissae".into()));
        }
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - xm) * (b - ym)).sum();
        let slope = sxy / sxx;
        let intercept = ym - slope * xm;
        let ss: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        Ok(Self { name: name.into(), x, y, slope, intercept, residual: (ss / m).sqrt() })
    }

    /// `y_i - (intercept + slope·x_i)`.
    pub fn residuals(&self) -> Vec<f64> {
        self.x.iter().zip(&self.y).map(|(a, b)| b - self.intercept - self.slope * a).collect()
    }
}

/// Everything an experiment produced, keyed so that it can be audited and replayed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub inputs: RateBoundInputs,
    pub records: Records,
    pub checks: Vec<BoundCheck>,
    pub fits: Vec<RateFit>,
    pub summary: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
}

impl ExperimentReport {
    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.get(key).copied()
    }

    pub fn flag(&self, key: &str) -> Option<bool> {
        self.flags.get(key).copied()
    }

    pub fn fit(&self, name: &str) -> Option<&RateFit> {
        self.fits.iter().find(|f| f.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Reads a report written by [`emit`] in JSON form.
    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }

    fn first_non_finite(&self) -> Option<String> {
        let rows = self.records.rows.iter().flatten().map(|v| ("records", *v));
        let checks = self.checks.iter().flat_map(|c| {
            [("check", c.lhs), ("check", c.rhs), ("check", c.min_constant)].into_iter().chain(c.inputs.values().map(|v| ("check input", *v)))
        });
        let fits = self.fits.iter().flat_map(|f| f.x.iter().chain(&f.y).map(|v| ("fit", *v)).chain([("fit", f.slope), ("fit", f.intercept)]));
        let summary = self.summary.values().map(|v| ("summary", *v));
        rows.chain(checks).chain(fits).chain(summary).find(|(_, v)| !v.is_finite()).map(|(w, v)| format!("{w} value {v}"))
    }
}

/// Output format of [`emit`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    /// The records table only.
    Csv,
    /// The whole report, config included.
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::Config(format!("unknown output format `{s}`"))),
        }
    }
}

/// Writes a report. Empty records and non-finite scalars are rejected.
pub fn emit(report: &ExperimentReport, format: OutputFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if report.records.is_empty() {
        return Err(Error::InvalidParameter("refusing to emit empty records".into()));
    }
    if let Some(what) = report.first_non_finite() {
        return Err(Error::Format(format!("cannot emit a non-finite {what}")));
    }
    let text = match format {
        OutputFormat::Csv => report.records.to_csv()?,
        OutputFormat::Json => serde_json::to_string_pretty(report)?,
    };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}
