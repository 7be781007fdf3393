//! Initial-condition presets and random test fields.

use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{inverse_real, PhysicalField, SpectralField, TorusGrid};

/// Random real mean-free field with Fourier support in `1 ≤ |η| ≤ kmax`.
///
/// Coefficients are complex Gaussians damped by `(1+|η|)^{-decay}`. They are
/// drawn in an order that depends only on `kmax`, so a seed describes the same
/// trigonometric polynomial on every grid that resolves it.
pub fn random_band_limited(grid: TorusGrid, kmax: usize, decay: f64, seed: u64) -> Result<PhysicalField> {
    if kmax == 0 || 2 * kmax >= grid.n() {
        return Err(Error::InvalidParameter(format!(
            "band limit {kmax} must lie in 1..{} on an n = {} grid",
            grid.n() / 2,
            grid.n()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = kmax as i64;
    let mut spectrum = SpectralField::zeros(grid);
    let second = if grid.dim() == 2 { -k..=k } else { 0..=0 };
    for a in -k..=k {
        for b in second.clone() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            // Fill each ±η pair once, from its lexicographically positive member.
            if (a, b) <= (0, 0) && !(a == 0 && b > 0) {
                continue;
            }
            let norm = ((a * a + b * b) as f64).sqrt();
            if norm > kmax as f64 {
                continue;
            }
            let c = Complex64::new(re, im) * (1.0 + norm).powf(-decay);
            spectrum.set_coeff([a, b], c);
            spectrum.set_coeff([-a, -b], c.conj());
        }
    }
    Ok(PhysicalField::from_raw(grid, inverse_real(grid, spectrum.coeffs())))
}

/// Preset initial data; every preset is mean-free and scaled to `max|θ₀| = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// `cos(η·x)`.
    Harmonic { wavevector: [i64; 2] },
    /// [`random_band_limited`] rescaled to unit sup norm.
    Random {
        seed: u64,
        #[serde(default = "default_band")]
        kmax: usize,
        #[serde(default = "default_decay")]
        decay: f64,
    },
    /// `tanh(β sin x₁ sin x₂) / tanh β` (`tanh(β sin x)/tanh β` in 1D).
    Checkerboard { beta: f64 },
}

fn default_band() -> usize {
    8
}

fn default_decay() -> f64 {
    1.0
}

impl InitialCondition {
    pub fn sample(&self, grid: TorusGrid) -> Result<PhysicalField> {
        let field = match *self {
            InitialCondition::Harmonic { wavevector: [k1, k2] } => {
                if k1 == 0 && k2 == 0 {
                    return Err(Error::InvalidParameter("harmonic preset needs η ≠ 0".into()));
                }
                if grid.dim() == 1 && k2 != 0 {
                    return Err(Error::DimensionMismatch("2D wave vector on a 1D grid".into()));
                }
                if 2 * k1.unsigned_abs().max(k2.unsigned_abs()) as usize >= grid.n() {
                    return Err(Error::InvalidParameter(format!(
                        "harmonic ({k1}, {k2}) is not resolved at n = {}",
                        grid.n()
                    )));
                }
                PhysicalField::from_fn(grid, |x| (k1 as f64 * x[0] + k2 as f64 * x.get(1).copied().unwrap_or(0.0)).cos())
            }
            InitialCondition::Random { seed, kmax, decay } => {
                random_band_limited(grid, kmax, decay, seed)?
            }
            InitialCondition::Checkerboard { beta } => {
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(Error::InvalidParameter(format!("checkerboard β = {beta}")));
                }
                let t = beta.tanh();
                PhysicalField::from_fn(grid, |x| (beta * x.iter().map(|v| v.sin()).product::<f64>()).tanh() / t)
            }
        };
        let m = field.max_abs();
        if m == 0.0 {
            return Err(Error::InvalidParameter("preset vanishes on this grid".into()));
        }
        Ok(field.scaled(1.0 / m))
    }
}

/// Parses `harmonic:4`, `harmonic:1,2`, `random:7`, `random:7,kmax=12,decay=0.5`
/// and `checkerboard:5`.
impl FromStr for InitialCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unrecognised initial condition `{s}`"));
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let parts: Vec<&str> = args.split(',').filter(|p| !p.is_empty()).collect();
        match name {
            "harmonic" => {
                let k: Vec<i64> = parts
                    .iter()
                    .map(|p| p.trim().parse().map_err(|_| bad()))
                    .collect::<Result<_>>()?;
                match k.as_slice() {
                    [a] => Ok(Self::Harmonic { wavevector: [*a, 0] }),
                    [a, b] => Ok(Self::Harmonic { wavevector: [*a, *b] }),
                    _ => Err(bad()),
                }
            }
            "random" => {
                let mut ic = (0, default_band(), default_decay());
                for p in parts {
                    match p.split_once('=') {
                        None => ic.0 = p.trim().parse().map_err(|_| bad())?,
                        Some(("seed", v)) => ic.0 = v.trim().parse().map_err(|_| bad())?,
                        Some(("kmax", v)) => ic.1 = v.trim().parse().map_err(|_| bad())?,
                        Some(("decay", v)) => ic.2 = v.trim().parse().map_err(|_| bad())?,
                        _ => return Err(bad()),
                    }
                }
                Ok(Self::Random {
                    seed: ic.0,
                    kmax: ic.1,
                    decay: ic.2,
                })
            }
            "checkerboard" => {
                let beta = if parts.is_empty() {
                    4.0
                } else {
                    parts[0].trim().parse().map_err(|_| bad())?
                };
                Ok(Self::Checkerboard { beta })
            }
            _ => Err(bad()),
        }
    }
}

/// `cos(k x₁)` on the grid, the workhorse of closed-form checks.
pub fn cosine(grid: TorusGrid, k: i64) -> PhysicalField {
    PhysicalField::from_fn(grid, |x| (k as f64 * x[0]).cos())
}

/// Shifts a field by whole grid cells, `θ(x - s h)` with `s` per axis.
pub fn shifted(f: &PhysicalField, shift: [usize; 2]) -> PhysicalField {
    let grid = f.grid();
    let n = grid.n();
    let values = (0..grid.len())
        .map(|i| {
            let [a, b] = grid.unflatten(i);
            let src = [(a + n - shift[0] % n) % n, (b + n - shift[1] % n) % n];
            f.values()[grid.flatten(src)]
        })
        .collect();
    PhysicalField::from_raw(grid, values)
}
