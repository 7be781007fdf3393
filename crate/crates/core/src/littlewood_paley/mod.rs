//! The dyadic partition of unity and the filters built from it.
//!
//! `ψ̂_j(η) = p(2^{-j}|η|)` is the low-pass multiplier at scale `2^j` and
//! `φ̂_k = ψ̂_k - ψ̂_{k-1}` the block multiplier, supported in the annulus
//! `2^{k-2} < |η| < 2^k`. All filtering is pointwise multiplication of
//! Fourier coefficients.

mod generator;

use serde::{Deserialize, Serialize};

pub use generator::{smooth_bump, GeneratorSpec};

use crate::error::{Error, Result};
use crate::spectral::{SpectralField, TorusGrid};

/// Cached multipliers of the Littlewood–Paley family on one grid.
#[derive(Clone, Debug)]
pub struct LPFamily {
    grid: TorusGrid,
    generator: GeneratorSpec,
    k_max: usize,
    /// `ψ̂_j` for `j = -1..=k_max + 2`; for larger `j` the multiplier is 1.
    psi: Vec<Vec<f64>>,
    /// `φ̂_k` for `k = 0..=k_max + 2`; for larger `k` the multiplier is 0.
    phi: Vec<Vec<f64>>,
    ones: Vec<f64>,
    zeros: Vec<f64>,
}

impl LPFamily {
    pub fn new(spec: &GeneratorSpec, grid: TorusGrid) -> Result<Self> {
        spec.validate()?;
        let k_max = grid.k_max();
        let norms = grid.wavenumber_norms();
        let psi: Vec<Vec<f64>> = (-1..=k_max as i32 + 2)
            .map(|j| {
                let scale = 2f64.powi(-j);
                norms.iter().map(|&r| spec.eval(scale * r)).collect()
            })
            .collect();
        let phi = (0..=k_max + 2)
            .map(|k| psi[k + 1].iter().zip(&psi[k]).map(|(hi, lo)| hi - lo).collect())
            .collect();
        let ones = vec![1.0; grid.len()];
        debug_assert!(psi.last().unwrap().iter().all(|&v| v == 1.0));
        Ok(Self {
            grid,
            generator: spec.clone(),
            k_max,
            psi,
            phi,
            zeros: vec![0.0; grid.len()],
            ones,
        })
    }

    /// Family built from the `smooth_bump` preset.
    pub fn standard(grid: TorusGrid) -> Self {
        Self::new(&GeneratorSpec::smooth_bump(), grid).expect("the preset profile is valid")
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn generator(&self) -> &GeneratorSpec {
        &self.generator
    }

    /// Largest block index `⌊log₂(n/2)⌋` used by every truncated sum.
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// `ψ̂_j` for any integer `j`.
    pub fn psi(&self, j: i64) -> &[f64] {
        if j < -1 {
            &self.psi[0]
        } else if j > self.k_max as i64 + 2 {
            &self.ones
        } else {
            &self.psi[(j + 1) as usize]
        }
    }

    /// `φ̂_k` for any integer `k` (zero for `k < 0` and `k > k_max + 2`).
    pub fn phi(&self, k: i64) -> &[f64] {
        if k < 0 || k > self.k_max as i64 + 2 {
            &self.zeros
        } else {
            &self.phi[k as usize]
        }
    }

    fn check_block_index(&self, k: usize, min: usize) -> Result<()> {
        if k < min || k > self.k_max {
            return Err(Error::IndexOutOfRange {
                index: k as i64,
                min: min as i64,
                max: self.k_max as i64,
            });
        }
        Ok(())
    }

    fn check_grid(&self, theta: &SpectralField) -> Result<()> {
        crate::spectral::check_same_grid(self.grid, theta.grid())
    }

    /// `θ_k = θ ∗ φ_k` for `1 ≤ k ≤ k_max`.
    pub fn block(&self, theta: &SpectralField, k: usize) -> Result<SpectralField> {
        self.check_grid(theta)?;
        self.check_block_index(k, 1)?;
        Ok(theta.multiplied(self.phi(k as i64)))
    }

    /// `θ_k^≥ = θ - θ ∗ ψ_{k-1}` for mean-free `θ` and `1 ≤ k ≤ k_max`.
    pub fn high_pass(&self, theta: &SpectralField, k: usize) -> Result<SpectralField> {
        self.check_grid(theta)?;
        self.check_block_index(k, 1)?;
        theta.ensure_mean_free()?;
        Ok(self.high_pass_unchecked(theta, k as i64))
    }

    pub(crate) fn high_pass_unchecked(&self, theta: &SpectralField, k: i64) -> SpectralField {
        let m: Vec<f64> = self.psi(k - 1).iter().map(|p| 1.0 - p).collect();
        theta.multiplied(&m)
    }

    /// `θ_k^≤ = θ ∗ ψ_k` for `0 ≤ k ≤ k_max`.
    pub fn low_pass(&self, theta: &SpectralField, k: usize) -> Result<SpectralField> {
        self.check_grid(theta)?;
        self.check_block_index(k, 0)?;
        Ok(theta.multiplied(self.psi(k as i64)))
    }

    /// All blocks `θ_1, …, θ_{k_max}`.
    pub fn decompose(&self, theta: &SpectralField) -> Result<BlockSequence> {
        self.check_grid(theta)?;
        let blocks = (1..=self.k_max)
            .map(|k| theta.multiplied(self.phi(k as i64)))
            .collect();
        Ok(BlockSequence { blocks })
    }

    /// `max |Σ_{k=1}^{k_max} φ̂_k(η) - 1|` over `1 ≤ |η| ≤ 2^{k_max-1}`.
    pub fn partition_of_unity_deviation(&self) -> f64 {
        let limit = 2f64.powi(self.k_max as i32 - 1);
        let mut worst: f64 = 0.0;
        for i in 0..self.grid.len() {
            let r = self.grid.wavenumber_norm(i);
            if r < 1.0 || r > limit {
                continue;
            }
            let sum: f64 = (1..=self.k_max as i64).map(|k| self.phi(k)[i]).sum();
            worst = worst.max((sum - 1.0).abs());
        }
        worst
    }

    /// Verifies `φ̂_k = φ̂_k(φ̂_{k-1} + φ̂_k + φ̂_{k+1})` and `φ̂_k φ̂_j = 0` for `|k-j| ≥ 2`.
    pub fn almost_orthogonality_check(&self) -> OrthogonalityReport {
        let top = self.k_max as i64 + 2;
        let mut neighbour_residual: f64 = 0.0;
        let mut disjointness: f64 = 0.0;
        for i in 0..self.grid.len() {
            if self.grid.wavenumber_norm(i) < 1.0 {
                continue;
            }
            for k in 1..=top {
                let pk = self.phi(k)[i];
                let around = self.phi(k - 1)[i] + pk + self.phi(k + 1)[i];
                neighbour_residual = neighbour_residual.max((pk - pk * around).abs());
                for j in (k + 2)..=top {
                    disjointness = disjointness.max((pk * self.phi(j)[i]).abs());
                }
            }
        }
        OrthogonalityReport {
            neighbour_residual,
            disjointness,
        }
    }
}

/// Residuals of the almost-orthogonality identities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    pub neighbour_residual: f64,
    /// `max |φ̂_k φ̂_j|` over `|k - j| ≥ 2`; zero by construction.
    pub disjointness: f64,
}

/// The blocks `θ_1, …, θ_{k_max}` of a field.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSequence {
    blocks: Vec<SpectralField>,
}

impl BlockSequence {
    /// Block `k`, counted from 1.
    pub fn get(&self, k: usize) -> Option<&SpectralField> {
        k.checked_sub(1).and_then(|i| self.blocks.get(i))
    }

    pub fn blocks(&self) -> &[SpectralField] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `Σ_k θ_k`.
    pub fn reconstruct(&self) -> SpectralField {
        let mut sum = SpectralField::zeros(self.blocks[0].grid());
        for b in &self.blocks {
            for (s, c) in sum.coeffs_mut().iter_mut().zip(b.coeffs()) {
                *s += c;
            }
        }
        sum
    }

    /// `‖θ_k‖²_{L²}` for `k = 1..`.
    pub fn energies(&self) -> Vec<f64> {
        self.blocks.iter().map(SpectralField::l2_norm_squared).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{cosine, random_band_limited};
    use crate::spectral::forward_transform;

    fn family(d: usize, n: usize) -> LPFamily {
        LPFamily::standard(TorusGrid::new(d, n).unwrap())
    }

    #[test]
    fn k_max_at_256() {
        assert_eq!(family(1, 256).k_max(), 7);
    }

    #[test]
    fn first_block_at_unit_frequency() {
        let fam = family(1, 64);
        let i = fam.grid().axis_index(1);
        assert_eq!(fam.phi(1)[i], 1.0);
    }

    #[test]
    fn partition_of_unity() {
        assert!(family(1, 256).partition_of_unity_deviation() < 1e-14);
        assert!(family(2, 128).partition_of_unity_deviation() < 1e-14);
    }

    #[test]
    fn support_and_range() {
        let fam = family(2, 64);
        let g = fam.grid();
        for k in 1..=fam.k_max() as i64 {
            let lo = 2f64.powi(k as i32 - 2);
            let hi = 2f64.powi(k as i32);
            for i in 0..g.len() {
                let r = g.wavenumber_norm(i);
                if r <= lo || r >= hi {
                    assert_eq!(fam.phi(k)[i], 0.0);
                }
                let p = fam.psi(k)[i];
                assert!((0.0..=1.0).contains(&p));
            }
        }
    }

    #[test]
    fn telescoping() {
        let fam = family(2, 64);
        for k in 0..=fam.k_max() as i64 {
            for i in 0..fam.grid().len() {
                let sum: f64 = fam.psi(0)[i] + (1..=k).map(|j| fam.phi(j)[i]).sum::<f64>();
                assert!((fam.psi(k)[i] - sum).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn cos4_blocks() {
        let fam = family(1, 64);
        let s = forward_transform(&cosine(fam.grid(), 4));
        let tol = 1e-15;
        assert!(fam.block(&s, 3).unwrap().sub(&s).unwrap().max_abs() < tol);
        assert!(fam.block(&s, 2).unwrap().max_abs() < tol);
        assert!(fam.block(&s, 4).unwrap().max_abs() < tol);
        assert!(fam.high_pass(&s, 3).unwrap().sub(&s).unwrap().max_abs() < tol);
        assert!(fam.high_pass(&s, 4).unwrap().max_abs() < tol);
        assert!(fam.low_pass(&s, 3).unwrap().sub(&s).unwrap().max_abs() < tol);
        assert!(fam.low_pass(&s, 1).unwrap().max_abs() < tol);
        let c1 = forward_transform(&cosine(fam.grid(), 1));
        assert!(fam.block(&c1, 1).unwrap().sub(&c1).unwrap().max_abs() < tol);
    }

    #[test]
    fn index_and_mean_errors() {
        let fam = family(1, 32);
        let s = forward_transform(&cosine(fam.grid(), 2));
        assert!(matches!(fam.block(&s, 0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(fam.block(&s, 5), Err(Error::IndexOutOfRange { .. })));
        let mut shifted = s.clone();
        shifted.set_coeff([0, 0], num_complex::Complex64::new(0.5, 0.0));
        assert!(matches!(fam.high_pass(&shifted, 2), Err(Error::NotMeanFree { .. })));
    }

    #[test]
    fn first_high_pass_is_identity_on_mean_free_fields() {
        let fam = family(2, 32);
        let s = forward_transform(&random_band_limited(fam.grid(), 12, 0.0, 4).unwrap());
        assert!(fam.high_pass(&s, 1).unwrap().sub(&s).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn high_pass_matches_block_tail_and_low_pass_complement() {
        let fam = family(2, 64);
        let s = forward_transform(&random_band_limited(fam.grid(), 30, 0.5, 8).unwrap());
        for k in 1..=fam.k_max() {
            let hp = fam.high_pass(&s, k).unwrap();
            let mut tail = SpectralField::zeros(fam.grid());
            for j in k as i64..=fam.k_max() as i64 + 2 {
                tail = tail.add(&s.multiplied(fam.phi(j))).unwrap();
            }
            assert!(hp.sub(&tail).unwrap().max_abs() < 1e-14 * s.max_abs());
            if k < fam.k_max() {
                let lo = fam.low_pass(&s, k).unwrap();
                let hi = fam.high_pass(&s, k + 1).unwrap();
                assert!(lo.add(&hi).unwrap().sub(&s).unwrap().max_abs() < 1e-14 * s.max_abs());
            }
        }
    }

    #[test]
    fn orthogonality() {
        let fam = family(2, 64);
        let rep = fam.almost_orthogonality_check();
        assert!(rep.neighbour_residual < 1e-14);
        assert_eq!(rep.disjointness, 0.0);
        let f1 = family(1, 64);
        let i = f1.grid().axis_index(4);
        let around = f1.phi(2)[i] + f1.phi(3)[i] + f1.phi(4)[i];
        assert_eq!(f1.phi(3)[i] - f1.phi(3)[i] * around, 0.0);
        for i in 0..f1.grid().len() {
            assert_eq!(f1.phi(2)[i] * f1.phi(5)[i], 0.0);
        }
    }

    #[test]
    fn reconstruction_of_band_limited_fields() {
        for (d, n) in [(1, 256), (2, 128)] {
            let fam = family(d, n);
            let band = 1 << (fam.k_max() - 1);
            for seed in 0..5 {
                let s = forward_transform(&random_band_limited(fam.grid(), band, 0.5, seed).unwrap());
                let err = fam.decompose(&s).unwrap().reconstruct().sub(&s).unwrap().l2_norm();
                assert!(err <= 1e-12 * s.l2_norm());
            }
        }
    }
}
