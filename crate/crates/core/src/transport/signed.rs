use serde::{Deserialize, Serialize};

use super::{check_delta, entropic_ot, exact_ot, log_cost, DiscreteMeasure, EntropicOptions};
use crate::besov::{besov_log_norm, InequalityReport};
use crate::error::{Error, Result};
use crate::littlewood_paley::LPFamily;
use crate::spectral::{check_same_grid, forward_transform, lq_norm, PhysicalField, TorusGrid, MEAN_TOLERANCE};

/// Splits a mean-free field into `σ⁺ dx` and `σ⁻ dx` carried by the grid points.
///
/// The negative part is rescaled so both totals agree exactly; the relative
/// imbalance before rescaling is logged.
pub fn signed_split(sigma: &PhysicalField) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    split_at(sigma, [0.0, 0.0])
}

fn split_at(sigma: &PhysicalField, offset: [f64; 2]) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    let grid = sigma.grid();
    let scale = sigma.max_abs();
    if scale == 0.0 {
        return Err(Error::EmptyMeasure("the zero field has no positive or negative part"));
    }
    let mean = sigma.mean();
    if mean.abs() > MEAN_TOLERANCE * scale.max(1.0) {
        return Err(Error::NotMeanFree { mean });
    }
    let vol = grid.cell_volume();
    let (mut pp, mut pm, mut np, mut nm) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, &v) in sigma.values().iter().enumerate() {
        let mut x = grid.point(i);
        x[0] += offset[0];
        if grid.dim() == 2 {
            x[1] += offset[1];
        }
        if v > 0.0 {
            pp.push(x);
            pm.push(v * vol);
        } else if v < 0.0 {
            np.push(x);
            nm.push(-v * vol);
        }
    }
    let mu = DiscreteMeasure::new(pp, pm)?;
    let mut nu = DiscreteMeasure::new(np, nm)?;
    let imbalance = (mu.total() - nu.total()).abs() / mu.total();
    if imbalance > 1e-12 {
        log::warn!("signed split imbalance {imbalance:e} exceeds 1e-12, rescaling the negative part");
    } else {
        log::debug!("signed split imbalance {imbalance:e}");
    }
    nu.scale_masses(mu.total() / nu.total());
    // Absorb the last rounding error of the sum into the heaviest atom.
    let heaviest = (0..nu.len()).max_by(|&a, &b| nu.masses()[a].total_cmp(&nu.masses()[b])).expect("nonempty");
    for _ in 0..4 {
        let diff = mu.total() - nu.total();
        if diff == 0.0 {
            break;
        }
        nu.masses[heaviest] += diff;
    }
    Ok((mu, nu))
}

/// A field averaged over `block^d` cells, with its masses placed at the block centres.
#[derive(Clone, Debug, PartialEq)]
pub struct Coarsened {
    pub field: PhysicalField,
    pub block: usize,
    /// Largest distance any unit of mass was moved, `√d (block - 1) h / 2`.
    pub radius: f64,
    offset: [f64; 2],
}

fn block_average(sigma: &PhysicalField, block: usize) -> Result<Coarsened> {
    let grid = sigma.grid();
    let (d, n) = (grid.dim(), grid.n());
    let coarse = TorusGrid::new(d, n / block)?;
    let mut values = vec![0.0; coarse.len()];
    for (i, &v) in sigma.values().iter().enumerate() {
        let [a, b] = grid.unflatten(i);
        values[coarse.flatten([a / block, b / block])] += v;
    }
    let cells = (block as f64).powi(d as i32);
    values.iter_mut().for_each(|v| *v /= cells);
    let shift = (block - 1) as f64 * grid.spacing() / 2.0;
    Ok(Coarsened {
        field: PhysicalField::new(coarse, values)?,
        block,
        radius: (d as f64).sqrt() * shift,
        offset: [shift, if d == 2 { shift } else { 0.0 }],
    })
}

/// Coarsens by the smallest power-of-two block for which the net field has at
/// most `max_support` nonzero cells. Total mass is preserved exactly up to
/// cancellation inside blocks, which only lowers the distance.
pub fn coarsen(sigma: &PhysicalField, max_support: usize) -> Result<Coarsened> {
    let n = sigma.grid().n();
    let mut block = 1;
    loop {
        let c = block_average(sigma, block)?;
        let support = c.field.values().iter().filter(|v| **v != 0.0).count();
        if support <= max_support || n / block <= 2 {
            return Ok(c);
        }
        block *= 2;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    Exact,
    Entropic { epsilon: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrOptions {
    pub method: Method,
    /// Coarsen supports larger than this; `None` never coarsens.
    pub max_support: Option<usize>,
}

impl Default for KrOptions {
    fn default() -> Self {
        Self { method: Method::Exact, max_support: Some(2048) }
    }
}

/// `D_δ(θ₁ - θ₂)` with the bookkeeping needed to audit it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrReport {
    pub distance: f64,
    pub method: Method,
    pub delta: f64,
    pub source_support: usize,
    pub target_support: usize,
    /// Mass of the positive part.
    pub mass: f64,
    pub block: usize,
    pub radius: f64,
    /// `c_δ(radius) (μ(𝕋) + ν(𝕋))`, bounding the change caused by coarsening.
    pub coarsening_bound: f64,
    pub gap: f64,
}

/// Kantorovich–Rubinstein distance between two mean-free fields.
pub fn kr_distance(theta1: &PhysicalField, theta2: &PhysicalField, delta: f64, opts: KrOptions) -> Result<KrReport> {
    check_same_grid(theta1.grid(), theta2.grid())?;
    check_delta(delta)?;
    let sigma = theta1.sub(theta2)?;
    let empty = KrReport {
        distance: 0.0,
        method: opts.method,
        delta,
        source_support: 0,
        target_support: 0,
        mass: 0.0,
        block: 1,
        radius: 0.0,
        coarsening_bound: 0.0,
        gap: 0.0,
    };
    if sigma.max_abs() == 0.0 {
        return Ok(empty);
    }
    let c = match opts.max_support {
        Some(max) => coarsen(&sigma, max)?,
        None => block_average(&sigma, 1)?,
    };
    if c.field.max_abs() == 0.0 {
        return Ok(KrReport { block: c.block, radius: c.radius, ..empty });
    }
    let (mu, nu) = split_at(&c.field, c.offset)?;
    let ot = match opts.method {
        Method::Exact => exact_ot(&mu, &nu, delta)?,
        Method::Entropic { epsilon } => entropic_ot(&mu, &nu, delta, epsilon, EntropicOptions::default())?,
    };
    Ok(KrReport {
        distance: ot.cost,
        method: opts.method,
        delta,
        source_support: mu.len(),
        target_support: nu.len(),
        mass: mu.total(),
        block: c.block,
        radius: c.radius,
        coarsening_bound: log_cost(c.radius, delta)? * (mu.total() + nu.total()),
        gap: ot.gap,
    })
}

/// Checks `‖σ‖_{L¹} ≤ C (D_δ(σ)/c_δ(1/ℓ) + ln^{-a}(ℓ) ‖σ‖_{B^{log,a}})`.
pub fn check_l5(fam: &LPFamily, sigma: &PhysicalField, a: f64, ell: f64, delta: f64, opts: KrOptions) -> Result<InequalityReport> {
    if !(ell >= 2.0 && ell.is_finite()) {
        return Err(Error::InvalidParameter(format!("ℓ must be at least 2 (got {ell})")));
    }
    check_same_grid(sigma.grid(), fam.grid())?;
    let l1 = lq_norm(sigma, 1.0)?;
    let zero = PhysicalField::zeros(sigma.grid());
    let kr = kr_distance(sigma, &zero, delta, opts)?;
    let besov = besov_log_norm(fam, &forward_transform(sigma), a)?.value;
    let c_ell = log_cost(1.0 / ell, delta)?;
    let rhs = kr.distance / c_ell + ell.ln().powf(-a) * besov;
    Ok(InequalityReport::new(
        l1,
        rhs,
        [
            ("l1", l1),
            ("kr_distance", kr.distance),
            ("besov", besov),
            ("c_delta_inv_ell", c_ell),
            ("a", a),
            ("ell", ell),
            ("delta", delta),
            ("coarsening_radius", kr.radius),
        ],
    ))
}
