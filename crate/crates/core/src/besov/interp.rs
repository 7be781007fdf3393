use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{besov_log_norm, gradient_besov_norm, homogeneous_sobolev_norm, kpow};
use crate::error::{Error, Result};
use crate::littlewood_paley::LPFamily;
use crate::spectral::{gradient, inverse_real, lq_norm, PhysicalField, SpectralField};

/// Both sides of an inequality `lhs ≤ C rhs` together with every input that
/// entered them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    /// Smallest admissible `C`: `lhs / rhs`, 0 when `lhs = 0`, `+∞` when only `rhs` vanishes.
    pub min_constant: f64,
    pub inputs: BTreeMap<String, f64>,
}

impl InequalityReport {
    pub fn new(lhs: f64, rhs: f64, inputs: impl IntoIterator<Item = (&'static str, f64)>) -> Self {
        let min_constant = if lhs == 0.0 {
            0.0
        } else if rhs == 0.0 {
            f64::INFINITY
        } else {
            lhs / rhs
        };
        Self {
            lhs,
            rhs,
            min_constant,
            inputs: inputs.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    pub fn holds_with(&self, c: f64) -> bool {
        self.lhs <= c * self.rhs * (1.0 + 1e-12)
    }
}

/// Which filtered family enters the pointwise supremum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupVariant {
    /// `sup_k k^b |θ_k^≥|`.
    Highpass,
    /// `sup_k k^b |θ_k|`.
    Block,
}

/// Mollifier families `{η_k}` for the weighted square function.
#[derive(Clone)]
pub enum MollifierFamily {
    /// `η_k = φ_k`.
    Blocks,
    /// `η_k = 2^{-k} ∇φ_k`; the modulus is the Euclidean norm over components.
    ScaledGradientBlocks,
    /// `η̂_k(ξ) = g(2^{-k}|ξ|)` for a user profile `g` with `g(0) = 0`.
    Radial { name: String, profile: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
}

impl fmt::Debug for MollifierFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Blocks => f.write_str("Blocks"),
            Self::ScaledGradientBlocks => f.write_str("ScaledGradientBlocks"),
            Self::Radial { name, .. } => write!(f, "Radial({name})"),
        }
    }
}

fn require_r(r: f64) -> Result<()> {
    if r.is_nan() || r < 2.0 {
        return Err(Error::InvalidExponent {
            value: r,
            reason: "the interpolation quantities need r ≥ 2",
        });
    }
    Ok(())
}

fn require_b(b: f64) -> Result<()> {
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::InvalidExponent {
            value: b,
            reason: "the weight exponent b must be finite and ≥ 0",
        });
    }
    Ok(())
}

/// `‖sup_{1≤k≤k_max} k^b |θ_k^≥|‖_{L^r}` or the same with blocks `θ_k`.
pub fn interp_sup_quantity(
    fam: &LPFamily,
    theta: &SpectralField,
    b: f64,
    r: f64,
    variant: SupVariant,
) -> Result<f64> {
    require_r(r)?;
    require_b(b)?;
    crate::spectral::check_same_grid(fam.grid(), theta.grid())?;
    theta.ensure_mean_free()?;
    let grid = fam.grid();
    let mut sup = vec![0.0f64; grid.len()];
    for k in 1..=fam.k_max() {
        let filtered = match variant {
            SupVariant::Highpass => fam.high_pass_unchecked(theta, k as i64),
            SupVariant::Block => theta.multiplied(fam.phi(k as i64)),
        };
        let w = kpow(k, b);
        for (s, v) in sup.iter_mut().zip(inverse_real(grid, filtered.coeffs())) {
            *s = s.max(w * v.abs());
        }
    }
    lq_norm(&PhysicalField::new(grid, sup)?, r)
}

/// `‖(Σ_{k=1}^{k_max} k^{2b} |θ ∗ η_k|²)^{1/2}‖_{L^r}`.
pub fn square_function_quantity(
    fam: &LPFamily,
    theta: &SpectralField,
    b: f64,
    r: f64,
    family: &MollifierFamily,
) -> Result<f64> {
    if r.is_nan() || r < 1.0 {
        return Err(Error::InvalidExponent {
            value: r,
            reason: "L^r norms need r ≥ 1",
        });
    }
    require_b(b)?;
    crate::spectral::check_same_grid(fam.grid(), theta.grid())?;
    let grid = fam.grid();
    let radial: Option<Vec<f64>> = match family {
        MollifierFamily::Radial { name, profile } => {
            let g0 = profile(0.0);
            if g0.abs() > 1e-14 {
                return Err(Error::InvalidGenerator {
                    name: name.clone(),
                    reason: format!("mollifier is not mean-free (ĝ(0) = {g0})"),
                });
            }
            Some(grid.wavenumber_norms())
        }
        _ => None,
    };
    let mut acc = vec![0.0f64; grid.len()];
    let mut add = |weight: f64, spectrum: &SpectralField| {
        for (s, v) in acc.iter_mut().zip(inverse_real(grid, spectrum.coeffs())) {
            *s += weight * v * v;
        }
    };
    for k in 1..=fam.k_max() {
        let w = kpow(k, 2.0 * b);
        match family {
            MollifierFamily::Blocks => add(w, &theta.multiplied(fam.phi(k as i64))),
            MollifierFamily::ScaledGradientBlocks => {
                let block = theta.multiplied(fam.phi(k as i64));
                let scale = 2f64.powi(-(k as i32));
                for component in gradient(&block) {
                    add(w * scale * scale, &component);
                }
            }
            MollifierFamily::Radial { profile, .. } => {
                let scale = 2f64.powi(-(k as i32));
                let m: Vec<f64> = radial.as_ref().unwrap().iter().map(|&r| profile(scale * r)).collect();
                add(w, &theta.multiplied(&m));
            }
        }
    }
    let root: Vec<f64> = acc.into_iter().map(f64::sqrt).collect();
    lq_norm(&PhysicalField::new(grid, root)?, r)
}

/// The gradient interpolation at a list of cut-offs `ℓ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct L3Report {
    pub ells: Vec<f64>,
    pub reports: Vec<InequalityReport>,
    /// `max_ℓ lhs/rhs(ℓ)`, the smallest `C` valid on the whole `ℓ`-grid.
    pub min_constant: f64,
}

/// `‖∇θ‖_{L²}` against `ℓ ln^{-a}ℓ ‖θ‖_{B^{log,a}} + ln^{-a}ℓ ‖∇θ‖_{B^{log,a}}`.
pub fn check_l3(fam: &LPFamily, theta: &SpectralField, a: f64, ells: &[f64]) -> Result<L3Report> {
    if ells.is_empty() || ells.iter().any(|&l| !(l >= 2.0 && l.is_finite())) {
        return Err(Error::InvalidParameter("every ℓ must be finite and ≥ 2".into()));
    }
    let lhs = homogeneous_sobolev_norm(theta, 1.0)?;
    let besov = besov_log_norm(fam, theta, a)?.value;
    let grad_besov = gradient_besov_norm(fam, theta, a)?;
    let reports: Vec<InequalityReport> = ells
        .iter()
        .map(|&ell| {
            let damp = ell.ln().powf(-a);
            let first = ell * damp * besov;
            let second = damp * grad_besov;
            InequalityReport::new(
                lhs,
                first + second,
                [
                    ("ell", ell),
                    ("a", a),
                    ("besov", besov),
                    ("gradient_besov", grad_besov),
                    ("first_term", first),
                    ("second_term", second),
                ],
            )
        })
        .collect();
    let min_constant = reports.iter().map(|r| r.min_constant).fold(0.0, f64::max);
    Ok(L3Report {
        ells: ells.to_vec(),
        reports,
        min_constant,
    })
}

/// `‖θ‖_{L²} ≤ C exp((‖θ‖_{B^{log,a}} / ‖θ‖_{L²})^{1/a}) ‖θ‖_{Ḣ^{-1}}`.
///
/// The exponential may be huge; `min_constant` is evaluated in log space.
pub fn mixing_duality_check(fam: &LPFamily, theta: &SpectralField, a: f64) -> Result<InequalityReport> {
    if !(a > 0.0) {
        return Err(Error::InvalidExponent {
            value: a,
            reason: "the duality bound needs a > 0",
        });
    }
    let l2 = theta.l2_norm();
    if l2 == 0.0 {
        return Err(Error::UndefinedRatio("‖θ‖_{B}/‖θ‖_{L²} for the zero field"));
    }
    let besov = besov_log_norm(fam, theta, a)?.value;
    let hm1 = homogeneous_sobolev_norm(theta, -1.0)?;
    let exponent = (besov / l2).powf(1.0 / a);
    let rhs = exponent.exp() * hm1;
    let mut report = InequalityReport::new(
        l2,
        rhs,
        [("a", a), ("l2", l2), ("besov", besov), ("hminus1", hm1), ("exponent", exponent)],
    );
    report.min_constant = (l2.ln() - exponent - hm1.ln()).exp();
    Ok(report)
}

/// `‖θ‖_∞^{1-b/a} ‖θ‖_{B^{log,a}}^{b/a}`, the common right-hand side of the
/// interpolation inequalities.
pub fn interpolation_rhs(linf: f64, besov: f64, a: f64, b: f64) -> f64 {
    let t = b / a;
    linf.powf(1.0 - t) * besov.powf(t)
}
