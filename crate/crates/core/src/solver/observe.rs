use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::besov::{self, BesovParams, Flavor};
use crate::error::{Error, Result};
use crate::littlewood_paley::LPFamily;
use crate::spectral::{inverse_transform, lq_norm, SpectralField};

/// A scalar recorded at every observer time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    L2,
    Linf,
    Lq { q: f64 },
    Besov { a: f64, flavor: Flavor },
    Hminus1,
    /// `|θ̂(0)|`, the spatial mean.
    Mean,
    /// `2κ ∫_0^t ‖∇θ‖²_{L²} ds`.
    Dissipation,
    /// `κ ∫_0^t ‖∇θ‖²_{B^{log,a}} ds`.
    BesovDissipation { a: f64 },
}

impl Diagnostic {
    pub fn column(&self) -> String {
        match self {
            Self::L2 => "l2".into(),
            Self::Linf => "linf".into(),
            Self::Lq { q } => format!("l{q}"),
            Self::Besov { a, flavor } => format!("besov_{}_a{a}", flavor.name()),
            Self::Hminus1 => "hminus1".into(),
            Self::Mean => "mean".into(),
            Self::Dissipation => "dissipation".into(),
            Self::BesovDissipation { a } => format!("besov_dissipation_a{a}"),
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match *self {
            Self::Lq { q } if !(q >= 1.0) => Err(Error::InvalidExponent { value: q, reason: "q must be at least 1" }),
            Self::Besov { a, .. } | Self::BesovDissipation { a } => BesovParams::new(a, Flavor::Block).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// Evaluates an instantaneous diagnostic; accumulators are handled by the simulation.
    pub(crate) fn instantaneous(&self, fam: Option<&LPFamily>, theta: &SpectralField) -> Result<f64> {
        let need_fam = || fam.ok_or_else(|| Error::InvalidParameter("Besov diagnostics need a Littlewood–Paley family".into()));
        Ok(match *self {
            Self::L2 => theta.l2_norm(),
            Self::Linf => inverse_transform(theta)?.max_abs(),
            Self::Lq { q } => lq_norm(&inverse_transform(theta)?, q)?,
            Self::Besov { a, flavor } => besov::norm(need_fam()?, theta, BesovParams::new(a, flavor)?)?.value,
            Self::Hminus1 => besov::homogeneous_sobolev_norm(theta, -1.0)?,
            Self::Mean => theta.coeffs()[0].norm(),
            Self::Dissipation | Self::BesovDissipation { .. } => unreachable!("accumulators are read from the simulation"),
        })
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::L2 => write!(f, "l2"),
            Self::Linf => write!(f, "linf"),
            Self::Lq { q } => write!(f, "lq:q={q}"),
            Self::Besov { a, flavor } => write!(f, "besov:a={a};flavor={}", flavor.name()),
            Self::Hminus1 => write!(f, "hminus1"),
            Self::Mean => write!(f, "mean"),
            Self::Dissipation => write!(f, "dissipation"),
            Self::BesovDissipation { a } => write!(f, "besov_dissipation:a={a}"),
        }
    }
}

fn parse_num(key: &str, v: &str) -> Result<f64> {
    v.parse().map_err(|_| Error::Config(format!("`{key}` expects a number, got `{v}`")))
}

impl FromStr for Diagnostic {
    type Err = Error;

    /// `name[:key=value[;key=value]]`, e.g. `besov:a=0.9;flavor=highpass`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let mut a = None;
        let mut q = None;
        let mut flavor = Flavor::Block;
        for kv in args.split(';').filter(|kv| !kv.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("malformed diagnostic argument `{kv}`")))?;
            match k.trim() {
                "a" => a = Some(parse_num(k, v.trim())?),
                "q" => q = Some(parse_num(k, v.trim())?),
                "flavor" => flavor = v.trim().parse()?,
                other => return Err(Error::Config(format!("unknown diagnostic argument `{other}`"))),
            }
        }
        let need = |x: Option<f64>, key: &str| x.ok_or_else(|| Error::Config(format!("diagnostic `{name}` needs `{key}=`")));
        let d = match name.trim() {
            "l2" => Self::L2,
            "linf" => Self::Linf,
            "lq" => Self::Lq { q: need(q, "q")? },
            "besov" => Self::Besov { a: need(a, "a")?, flavor },
            "hminus1" => Self::Hminus1,
            "mean" => Self::Mean,
            "dissipation" => Self::Dissipation,
            "besov_dissipation" => Self::BesovDissipation { a: need(a, "a")? },
            other => return Err(Error::Config(format!("unknown diagnostic `{other}`"))),
        };
        d.validate()?;
        Ok(d)
    }
}

/// Parses a comma separated diagnostic list.
pub fn parse_diagnostics(list: &str) -> Result<Vec<Diagnostic>> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse()).collect()
}

/// Sampling times and the diagnostics recorded at each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObserverSet {
    pub times: Vec<f64>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ObserverSet {
    pub fn new(times: Vec<f64>, diagnostics: Vec<Diagnostic>) -> Result<Self> {
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("observer times must be finite, nonnegative and increasing".into()));
        }
        for d in &diagnostics {
            d.validate()?;
        }
        Ok(Self { times, diagnostics })
    }

    /// `count + 1` equally spaced times on `[0, t_end]`.
    pub fn uniform(t_end: f64, count: usize, diagnostics: Vec<Diagnostic>) -> Result<Self> {
        let count = count.max(1);
        Self::new((0..=count).map(|i| t_end * i as f64 / count as f64).collect(), diagnostics)
    }
}

/// Residuals of the conservation laws over the sampled times.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    /// `max_t |θ̂(t, 0)|`.
    pub mean_max: f64,
    /// `max_t |‖θ(t)‖_{L²} - ‖θ₀‖_{L²}| / ‖θ₀‖_{L²}` (meaningful for κ = 0).
    pub l2_drift: f64,
    /// `max_t ‖θ(t)‖_∞ / ‖θ₀‖_∞ - 1`, with `‖θ₀‖_∞` taken on a 4× oversampled grid.
    pub linf_growth: f64,
    /// `max_t |‖θ‖² + 2κ∫‖∇θ‖² - ‖θ₀‖²| / ‖θ₀‖²`.
    pub energy_balance: f64,
    /// Whether `‖θ‖_{L²}` never increased between samples.
    pub l2_monotone: bool,
}

/// Diagnostics sampled along a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub columns: Vec<String>,
    pub times: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub conservation: ConservationReport,
}

impl TimeSeries {
    /// Values of one column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// CSV text with a leading `t` column.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["t".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for (t, row) in self.times.iter().zip(&self.rows) {
            let mut rec = vec![format!("{t:e}")];
            rec.extend(row.iter().map(|v| format!("{v:e}")));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }
}
