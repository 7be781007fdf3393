use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::InitialCondition;
use crate::solver::VelocityModel;
use crate::spectral::TorusGrid;

/// Which estimate an experiment exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Inviscid Besov growth against `G^a‖θ₀‖_∞ + ‖θ₀‖_B`.
    Regularity,
    /// The same with diffusion, including the Besov dissipation term.
    Diffusive,
    /// Strong, gradient and weak errors of the vanishing-diffusivity limit.
    Zerodiff,
    /// Decay of `‖θ‖_{Ḣ^{-1}}` and, for `κ > 0`, half-energy times.
    Mixing,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Regularity => "regularity",
            Self::Diffusive => "diffusive",
            Self::Zerodiff => "zerodiff",
            Self::Mixing => "mixing",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regularity" => Ok(Self::Regularity),
            "diffusive" => Ok(Self::Diffusive),
            "zerodiff" => Ok(Self::Zerodiff),
            "mixing" => Ok(Self::Mixing),
            _ => Err(Error::Config(format!("unknown experiment kind `{s}`"))),
        }
    }
}

/// Where [`emit`](super::emit) writes, when run from a config file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

fn default_dim() -> usize {
    2
}

fn default_p() -> f64 {
    2.0
}

fn default_samples() -> usize {
    50
}

fn default_support() -> usize {
    2048
}

fn default_envelope() -> f64 {
    std::f64::consts::LN_2
}

/// Everything needed to reproduce one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub n: usize,
    pub a: f64,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub kappa: Vec<f64>,
    pub t_end: f64,
    pub dt: f64,
    /// Number of sampling intervals; records hold `samples + 1` times including `t = 0`.
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub velocity: VelocityModel,
    pub initial: InitialCondition,
    /// Also record the commutator sums and the bounds built on them (regularity only).
    #[serde(default)]
    pub commutator: bool,
    /// Support budget of the exact transport solver before coarsening.
    #[serde(default = "default_support")]
    pub kr_max_support: usize,
    /// Allowed drop of `ln‖θ‖_{Ḣ^{-1}}` below its affine fit.
    #[serde(default = "default_envelope")]
    pub envelope_tolerance: f64,
    #[serde(default)]
    pub output: OutputPaths,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.dim, self.n)
    }

    /// `q = p/(p-1)`, the exponent dual to `p`.
    pub fn q(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// The random seed of the initial datum, if it has one.
    pub fn seed(&self) -> Option<u64> {
        match self.initial {
            InitialCondition::Random { seed, .. } => Some(seed),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let grid = self.grid().map_err(|e| Error::Config(e.to_string()))?;
        if !(self.p > 1.0 && self.p.is_finite()) {
            return bad(format!("p must lie in (1, ∞) (got {})", self.p));
        }
        if !(self.a >= 0.5 && self.a < 0.5 * self.p) {
            return bad(format!("a must lie in [1/2, p/2) = [0.5, {}) (got {})", 0.5 * self.p, self.a));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive (got {})", self.t_end));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive (got {})", self.dt));
        }
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if self.kr_max_support < 2 {
            return bad("kr_max_support must be at least 2".into());
        }
        if !(self.envelope_tolerance >= 0.0 && self.envelope_tolerance.is_finite()) {
            return bad(format!("envelope_tolerance must be nonnegative (got {})", self.envelope_tolerance));
        }
        if let Some(k) = self.kappa.iter().find(|k| !(k.is_finite() && **k >= 0.0)) {
            return bad(format!("diffusivities must be finite and nonnegative (got {k})"));
        }
        self.velocity.validate(grid).map_err(|e| Error::Config(e.to_string()))?;
        match self.kind {
            ExperimentKind::Regularity => {
                if self.kappa.iter().any(|k| *k != 0.0) {
                    return bad("the regularity experiment is inviscid; leave kappa empty".into());
                }
            }
            ExperimentKind::Diffusive => {
                if self.kappa.is_empty() || self.kappa.iter().any(|k| *k == 0.0) {
                    return bad("the diffusive experiment needs positive diffusivities".into());
                }
            }
            ExperimentKind::Zerodiff => {
                if self.kappa.iter().any(|k| *k == 0.0) {
                    return bad("the zero-diffusivity sweep needs positive diffusivities".into());
                }
                let decades: BTreeSet<i64> = self.kappa.iter().map(|k| k.log10().floor() as i64).collect();
                if decades.len() < 4 {
                    return bad(format!("the κ-list must cover at least 4 decades (covers {})", decades.len()));
                }
            }
            ExperimentKind::Mixing => {}
        }
        Ok(())
    }
}
