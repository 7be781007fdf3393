//! Kantorovich–Rubinstein distances with the concave cost `c_δ(z) = ln(z/δ + 1)`.
//!
//! Points live on the torus `[0, 2π)^d` (`d ≤ 2`, stored as `[f64; 2]` with a
//! zero second coordinate in 1D) and distances are geodesic.

mod entropic;
mod exact;
mod signed;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use entropic::{entropic_ot, EntropicOptions};
pub use exact::{exact_ot, EXACT_MAX_SUPPORT};
pub use signed::{check_l5, coarsen, kr_distance, signed_split, Coarsened, KrOptions, KrReport, Method};

use crate::error::{Error, Result};

/// `c_δ(z) = ln(z/δ + 1)`.
pub fn log_cost(z: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if !(z >= 0.0) {
        return Err(Error::InvalidParameter(format!("distance must be nonnegative (got {z})")));
    }
    Ok((z / delta).ln_1p())
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("δ must be positive (got {delta})")));
    }
    Ok(())
}

/// Geodesic distance on `[0, 2π)²`.
pub fn torus_distance(x: [f64; 2], y: [f64; 2]) -> f64 {
    let axis = |a: f64, b: f64| {
        let d = (a - b).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d)
    };
    axis(x[0], y[0]).hypot(axis(x[1], y[1]))
}

/// The metric `d_δ(x, y) = c_δ(|x - y|_𝕋)`; `δ` is assumed validated.
#[inline]
pub(crate) fn d_delta(x: [f64; 2], y: [f64; 2], delta: f64) -> f64 {
    (torus_distance(x, y) / delta).ln_1p()
}

/// Finitely many weighted points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    points: Vec<[f64; 2]>,
    pub(crate) masses: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(points: Vec<[f64; 2]>, masses: Vec<f64>) -> Result<Self> {
        if points.len() != masses.len() {
            return Err(Error::DimensionMismatch(format!("{} points but {} masses", points.len(), masses.len())));
        }
        if masses.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
            return Err(Error::InvalidParameter("masses must be finite and nonnegative".into()));
        }
        if points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("points must be finite".into()));
        }
        if !(masses.iter().sum::<f64>() > 0.0) {
            return Err(Error::EmptyMeasure("a measure needs positive total mass"));
        }
        Ok(Self { points, masses })
    }

    /// A unit Dirac mass.
    pub fn dirac(x: [f64; 2]) -> Self {
        Self { points: vec![x], masses: vec![1.0] }
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub(crate) fn scale_masses(&mut self, f: f64) {
        self.masses.iter_mut().for_each(|m| *m *= f);
    }
}

/// A coupling stored as its nonzero entries `(i, j, π_ij)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl TransportPlan {
    pub fn row_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.rows];
        for &(i, _, m) in &self.entries {
            s[i] += m;
        }
        s
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols];
        for &(_, j, m) in &self.entries {
            s[j] += m;
        }
        s
    }

    /// `max(max_i |row_i - μ_i|, max_j |col_j - ν_j|)`.
    pub fn marginal_violation(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        let r = self.row_sums().iter().zip(mu.masses()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let c = self.col_sums().iter().zip(nu.masses()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r.max(c)
    }

    pub fn dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.cols]; self.rows];
        for &(i, j, v) in &self.entries {
            m[i][j] += v;
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OtMethod {
    Exact,
    Entropic,
}

/// Optimal value, plan and Kantorovich potentials.
///
/// `source_potential[i] = φ(x_i)` and `target_potential[j] = φ(y_j)`, so that
/// the dual value is `Σ φ(x_i) μ_i - Σ φ(y_j) ν_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OtResult {
    pub method: OtMethod,
    pub cost: f64,
    pub plan: TransportPlan,
    pub source_potential: Vec<f64>,
    pub target_potential: Vec<f64>,
    pub dual_value: f64,
    /// `|cost - dual_value|`.
    pub gap: f64,
    /// `max(0, max_{u,v} |φ(u) - φ(v)| - d_δ(u, v))` over the combined support
    /// (exact solver); 0 when not evaluated.
    pub lipschitz_violation: f64,
    pub marginal_violation: f64,
    pub iterations: usize,
}

pub(crate) fn check_balance(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    let (a, b) = (mu.total(), nu.total());
    if (a - b).abs() > 1e-9 * a.max(b) {
        return Err(Error::MassMismatch { source_mass: a, target_mass: b });
    }
    Ok(())
}

pub(crate) fn cost_matrix(mu: &DiscreteMeasure, nu: &DiscreteMeasure, delta: f64) -> Vec<f64> {
    let mut c = Vec::with_capacity(mu.len() * nu.len());
    for &x in mu.points() {
        for &y in nu.points() {
            c.push(d_delta(x, y, delta));
        }
    }
    c
}

pub(crate) fn dual_value(mu: &DiscreteMeasure, nu: &DiscreteMeasure, phi: &[f64], psi: &[f64]) -> f64 {
    let a: f64 = phi.iter().zip(mu.masses()).map(|(p, m)| p * m).sum();
    let b: f64 = psi.iter().zip(nu.masses()).map(|(p, m)| p * m).sum();
    a - b
}
