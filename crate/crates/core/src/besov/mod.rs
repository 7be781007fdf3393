//! Logarithmic Besov norms and the interpolation quantities built on them.
//!
//! All quadratic norms are evaluated in coefficient space with Parseval's
//! identity `‖f‖²_{L²} = (2π)^d Σ_η |f̂(η)|²`. Logarithms are natural.

mod gagliardo;
mod interp;

use serde::{Deserialize, Serialize};

pub use gagliardo::{gagliardo_log_seminorm, GAGLIARDO_MAX_N};
pub use interp::{
    check_l3, interp_sup_quantity, interpolation_rhs, mixing_duality_check, square_function_quantity, InequalityReport,
    L3Report, MollifierFamily, SupVariant,
};

use crate::error::{Error, Result};
use crate::littlewood_paley::LPFamily;
use crate::spectral::{SpectralField, TorusGrid};

/// Which of the equivalent smoothness functionals to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    /// `(Σ_k k^{2a} ‖θ_k‖²)^{1/2}`.
    Block,
    /// `(Σ_j j^{2a-1} ‖θ_j^≥‖²)^{1/2}`.
    Highpass,
    /// `((2π)^d Σ_η ln^{2a}(|η|+1) |θ̂(η)|²)^{1/2}`.
    Logsum,
    /// Double-integral seminorm, see [`gagliardo_log_seminorm`].
    Gagliardo,
}

impl Flavor {
    pub const ALL: [Flavor; 4] = [Flavor::Block, Flavor::Highpass, Flavor::Logsum, Flavor::Gagliardo];

    pub fn name(self) -> &'static str {
        match self {
            Flavor::Block => "block",
            Flavor::Highpass => "highpass",
            Flavor::Logsum => "logsum",
            Flavor::Gagliardo => "gagliardo",
        }
    }
}

impl std::str::FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Flavor::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown norm flavor `{s}`")))
    }
}

/// Smoothness exponent and flavor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub a: f64,
    pub flavor: Flavor,
}

impl BesovParams {
    pub fn new(a: f64, flavor: Flavor) -> Result<Self> {
        check_a(a)?;
        Ok(Self { a, flavor })
    }
}

/// A norm value with its per-scale breakdown.
///
/// For every flavor `value² = Σ per_k`. The entry `per_k[k-1]` belongs to
/// block `k` (to the dyadic shell `2^{k-1} ≤ |η| < 2^k` for `logsum`, and a
/// single entry for `gagliardo`). `tail` is the unweighted energy
/// `‖θ - Σ_{k ≤ k_max} θ_k‖²` that the truncated block sum cannot see.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub flavor: Flavor,
    pub a: f64,
    pub value: f64,
    pub per_k: Vec<f64>,
    pub k_max: usize,
    pub tail: f64,
}

pub(crate) fn check_a(a: f64) -> Result<()> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::InvalidExponent {
            value: a,
            reason: "the smoothness exponent must be finite and ≥ 0",
        });
    }
    Ok(())
}

/// `k^e` with the convention `0^0 = 1`.
#[inline]
pub(crate) fn kpow(k: usize, e: f64) -> f64 {
    (k as f64).powf(e)
}

/// `(2π)^d Σ_η w(η) |θ̂(η)|²`.
pub fn weighted_energy(theta: &SpectralField, weights: &[f64]) -> f64 {
    theta.grid().volume()
        * theta
            .coeffs()
            .iter()
            .zip(weights)
            .map(|(c, w)| w * c.norm_sqr())
            .sum::<f64>()
}

fn energy_with(theta: &SpectralField, multiplier: &[f64]) -> f64 {
    theta.grid().volume()
        * theta
            .coeffs()
            .iter()
            .zip(multiplier)
            .map(|(c, m)| m * m * c.norm_sqr())
            .sum::<f64>()
}

fn prepare(fam: &LPFamily, theta: &SpectralField, a: f64) -> Result<()> {
    crate::spectral::check_same_grid(fam.grid(), theta.grid())?;
    check_a(a)?;
    theta.ensure_mean_free()
}

fn truncation_tail(fam: &LPFamily, theta: &SpectralField) -> f64 {
    let m: Vec<f64> = fam.psi(fam.k_max() as i64).iter().map(|p| 1.0 - p).collect();
    energy_with(theta, &m)
}

/// `‖θ‖_{B^{log,a}} = (Σ_{k=1}^{k_max} k^{2a} ‖θ_k‖²_{L²})^{1/2}`.
pub fn besov_log_norm(fam: &LPFamily, theta: &SpectralField, a: f64) -> Result<NormReport> {
    prepare(fam, theta, a)?;
    let per_k: Vec<f64> = (1..=fam.k_max())
        .map(|k| kpow(k, 2.0 * a) * energy_with(theta, fam.phi(k as i64)))
        .collect();
    Ok(NormReport {
        flavor: Flavor::Block,
        a,
        value: per_k.iter().sum::<f64>().sqrt(),
        per_k,
        k_max: fam.k_max(),
        tail: truncation_tail(fam, theta),
    })
}

/// `(Σ_{j=1}^{k_max} j^{2a-1} ‖θ_j^≥‖²_{L²})^{1/2}`.
pub fn besov_log_norm_equiv(fam: &LPFamily, theta: &SpectralField, a: f64) -> Result<NormReport> {
    prepare(fam, theta, a)?;
    let per_k: Vec<f64> = (1..=fam.k_max())
        .map(|j| {
            let m: Vec<f64> = fam.psi(j as i64 - 1).iter().map(|p| 1.0 - p).collect();
            kpow(j, 2.0 * a - 1.0) * energy_with(theta, &m)
        })
        .collect();
    Ok(NormReport {
        flavor: Flavor::Highpass,
        a,
        value: per_k.iter().sum::<f64>().sqrt(),
        per_k,
        k_max: fam.k_max(),
        tail: truncation_tail(fam, theta),
    })
}

/// `((2π)^d Σ_{η≠0} ln^{2a}(|η|+1) |θ̂(η)|²)^{1/2}`.
pub fn log_sobolev_sum(theta: &SpectralField, a: f64) -> Result<NormReport> {
    check_a(a)?;
    theta.ensure_mean_free()?;
    let grid = theta.grid();
    let shells = grid.k_max() + 2;
    let mut per_k = vec![0.0; shells];
    for (i, c) in theta.coeffs().iter().enumerate().skip(1) {
        let r = grid.wavenumber_norm(i);
        let shell = (r.log2().floor() as usize).min(shells - 1);
        per_k[shell] += grid.volume() * (r + 1.0).ln().powf(2.0 * a) * c.norm_sqr();
    }
    Ok(NormReport {
        flavor: Flavor::Logsum,
        a,
        value: per_k.iter().sum::<f64>().sqrt(),
        per_k,
        k_max: grid.k_max(),
        tail: 0.0,
    })
}

/// `((2π)^d Σ_{η≠0} |η|^{2s} |θ̂(η)|²)^{1/2}`.
pub fn homogeneous_sobolev_norm(theta: &SpectralField, s: f64) -> Result<f64> {
    theta.ensure_mean_free()?;
    if !s.is_finite() {
        return Err(Error::InvalidExponent {
            value: s,
            reason: "Sobolev order must be finite",
        });
    }
    let grid = theta.grid();
    let sum: f64 = theta
        .coeffs()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| {
            let r2 = {
                let [a, b] = grid.wavenumber(i);
                (a * a + b * b) as f64
            };
            r2.powf(s) * c.norm_sqr()
        })
        .sum();
    Ok((grid.volume() * sum).sqrt())
}

/// Evaluates one flavor.
pub fn norm(fam: &LPFamily, theta: &SpectralField, params: BesovParams) -> Result<NormReport> {
    match params.flavor {
        Flavor::Block => besov_log_norm(fam, theta, params.a),
        Flavor::Highpass => besov_log_norm_equiv(fam, theta, params.a),
        Flavor::Logsum => log_sobolev_sum(theta, params.a),
        Flavor::Gagliardo => {
            theta.ensure_mean_free()?;
            let field = crate::spectral::inverse_transform(theta)?;
            let value = gagliardo_log_seminorm(&field, params.a)?;
            Ok(NormReport {
                flavor: Flavor::Gagliardo,
                a: params.a,
                value,
                per_k: vec![value * value],
                k_max: theta.grid().k_max(),
                tail: 0.0,
            })
        }
    }
}

/// Per-mode weights `Σ_k k^{2a} φ̂_k(η)²`, so that
/// `‖θ‖²_{B^{log,a}} = weighted_energy(θ, w)`.
pub fn block_weights(fam: &LPFamily, a: f64) -> Vec<f64> {
    let mut w = vec![0.0; fam.grid().len()];
    for k in 1..=fam.k_max() {
        let c = kpow(k, 2.0 * a);
        for (wi, p) in w.iter_mut().zip(fam.phi(k as i64)) {
            *wi += c * p * p;
        }
    }
    w
}

/// Per-mode weights `Σ_j j^{2a-1} (1 - ψ̂_{j-1}(η))²` of the high-pass norm.
pub fn highpass_weights(fam: &LPFamily, a: f64) -> Vec<f64> {
    let mut w = vec![0.0; fam.grid().len()];
    for j in 1..=fam.k_max() {
        let c = kpow(j, 2.0 * a - 1.0);
        for (wi, p) in w.iter_mut().zip(fam.psi(j as i64 - 1)) {
            *wi += c * (1.0 - p) * (1.0 - p);
        }
    }
    w
}

/// Multiplies weights by `|η|²`, turning a norm of `θ` into the norm of `∇θ`.
pub fn gradient_weights(grid: TorusGrid, weights: &[f64]) -> Vec<f64> {
    weights
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let [a, b] = grid.wavenumber(i);
            w * (a * a + b * b) as f64
        })
        .collect()
}

/// `‖∇θ‖_{B^{log,a}} = (Σ_k k^{2a} ‖∇θ_k‖²)^{1/2}`, components summed in `L²`.
pub fn gradient_besov_norm(fam: &LPFamily, theta: &SpectralField, a: f64) -> Result<f64> {
    prepare(fam, theta, a)?;
    let w = gradient_weights(fam.grid(), &block_weights(fam, a));
    Ok(weighted_energy(theta, &w).sqrt())
}

/// `(Σ_j j^{2a-1} ‖∇θ_j^≥‖²)^{1/2}`.
pub fn gradient_highpass_norm(fam: &LPFamily, theta: &SpectralField, a: f64) -> Result<f64> {
    prepare(fam, theta, a)?;
    let w = gradient_weights(fam.grid(), &highpass_weights(fam, a));
    Ok(weighted_energy(theta, &w).sqrt())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::fields::{cosine, random_band_limited};
    use crate::spectral::{forward_transform, lq_norm};

    fn setup(d: usize, n: usize) -> LPFamily {
        LPFamily::standard(TorusGrid::new(d, n).unwrap())
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn cos4_closed_forms() {
        let fam = setup(1, 64);
        let s = forward_transform(&cosine(fam.grid(), 4));
        assert!(rel(besov_log_norm(&fam, &s, 1.0).unwrap().value, 3.0 * PI.sqrt()) < 1e-12);
        assert!(rel(besov_log_norm_equiv(&fam, &s, 1.0).unwrap().value, (6.0 * PI).sqrt()) < 1e-12);
        // Parseval: 2π · ln²5 · (¼ + ¼).
        assert!(rel(log_sobolev_sum(&s, 1.0).unwrap().value, PI.sqrt() * 5f64.ln()) < 1e-12);
        assert!(rel(homogeneous_sobolev_norm(&s, -1.0).unwrap(), PI.sqrt() / 4.0) < 1e-12);
        assert!(rel(homogeneous_sobolev_norm(&s, 1.0).unwrap(), 4.0 * PI.sqrt()) < 1e-12);
    }

    #[test]
    fn cos1_closed_forms() {
        let fam = setup(1, 64);
        let s = forward_transform(&cosine(fam.grid(), 1));
        for a in [0.0, 0.5, 1.0, 2.5] {
            assert!(rel(besov_log_norm(&fam, &s, a).unwrap().value, PI.sqrt()) < 1e-12);
        }
        assert!(rel(besov_log_norm_equiv(&fam, &s, 0.5).unwrap().value, PI.sqrt()) < 1e-12);
    }

    #[test]
    fn zero_field_has_zero_norms() {
        let fam = setup(2, 16);
        let z = SpectralField::zeros(fam.grid());
        for f in [Flavor::Block, Flavor::Highpass, Flavor::Logsum, Flavor::Gagliardo] {
            assert_eq!(norm(&fam, &z, BesovParams::new(0.9, f).unwrap()).unwrap().value, 0.0);
        }
    }

    #[test]
    fn reports_sum_to_value_squared() {
        let fam = setup(2, 32);
        let s = forward_transform(&random_band_limited(fam.grid(), 10, 0.5, 2).unwrap());
        for f in [Flavor::Block, Flavor::Highpass, Flavor::Logsum] {
            let r = norm(&fam, &s, BesovParams::new(0.7, f).unwrap()).unwrap();
            let sum: f64 = r.per_k.iter().sum();
            assert!(rel(r.value * r.value, sum) < 1e-14);
        }
    }

    #[test]
    fn weights_reproduce_block_norms() {
        let fam = setup(2, 32);
        let s = forward_transform(&random_band_limited(fam.grid(), 12, 0.0, 5).unwrap());
        let a = 0.8;
        let b = besov_log_norm(&fam, &s, a).unwrap().value;
        assert!(rel(weighted_energy(&s, &block_weights(&fam, a)).sqrt(), b) < 1e-13);
        let h = besov_log_norm_equiv(&fam, &s, a).unwrap().value;
        assert!(rel(weighted_energy(&s, &highpass_weights(&fam, a)).sqrt(), h) < 1e-13);
    }

    #[test]
    fn sobolev_order_zero_is_l2() {
        let fam = setup(2, 32);
        let f = random_band_limited(fam.grid(), 12, 0.0, 6).unwrap();
        let s = forward_transform(&f);
        assert!(rel(homogeneous_sobolev_norm(&s, 0.0).unwrap(), lq_norm(&f, 2.0).unwrap()) < 1e-12);
    }

    #[test]
    fn rejects_mean_and_negative_a() {
        let fam = setup(1, 16);
        let mut s = forward_transform(&cosine(fam.grid(), 2));
        assert!(matches!(besov_log_norm(&fam, &s, -0.1), Err(Error::InvalidExponent { .. })));
        s.set_coeff([0, 0], num_complex::Complex64::new(1.0, 0.0));
        assert!(matches!(besov_log_norm(&fam, &s, 1.0), Err(Error::NotMeanFree { .. })));
        assert!(matches!(besov_log_norm_equiv(&fam, &s, 1.0), Err(Error::NotMeanFree { .. })));
    }

    #[test]
    fn gradient_norm_of_cos4() {
        let fam = setup(1, 64);
        let s = forward_transform(&cosine(fam.grid(), 4));
        // ∇cos4x lives in block 3 only: 3 · ‖4 sin 4x‖ = 12√π.
        assert!(rel(gradient_besov_norm(&fam, &s, 1.0).unwrap(), 12.0 * PI.sqrt()) < 1e-12);
    }

    #[test]
    fn truncation_tail_is_reported() {
        let fam = setup(1, 32);
        let s = forward_transform(&cosine(fam.grid(), 12));
        let r = besov_log_norm(&fam, &s, 1.0).unwrap();
        assert!(r.tail > 0.0);
        let inside = besov_log_norm(&fam, &forward_transform(&cosine(fam.grid(), 3)), 1.0).unwrap();
        assert!(inside.tail < 1e-28);
    }
}
