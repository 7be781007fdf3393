use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::TorusGrid;
use super::{DIVERGENCE_TOLERANCE, MEAN_TOLERANCE};
use crate::error::{Error, Result};

/// Real samples of a scalar on a [`TorusGrid`], row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl PhysicalField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite sample at index {i}"
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Samples `f` at every grid point; `f` receives the `d` coordinates.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let d = grid.dim();
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.point(i);
                f(&x[..d])
            })
            .collect();
        Self { grid, values }
    }

    pub(crate) fn from_raw(grid: TorusGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Arithmetic average of the samples.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Pointwise `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_same_grid(self.grid, other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Pointwise `self + other`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same_grid(self.grid, other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }
}

/// Fourier coefficients `θ̂(η)` in FFT order, normalised as averages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a grid of {} points",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub(crate) fn from_raw(grid: TorusGrid, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self { grid, coeffs }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at the signed wave number `η` (second entry ignored for `d = 1`).
    pub fn coeff(&self, eta: [i64; 2]) -> Complex64 {
        self.coeffs[self.index_of(eta)]
    }

    pub fn set_coeff(&mut self, eta: [i64; 2], value: Complex64) {
        let i = self.index_of(eta);
        self.coeffs[i] = value;
    }

    fn index_of(&self, eta: [i64; 2]) -> usize {
        let g = self.grid;
        g.flatten([g.axis_index(eta[0]), g.axis_index(eta[1])])
    }

    /// Zero-mode coefficient, i.e. the mean of the represented field.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// `(2π)^d Σ_η |θ̂(η)|²`, the squared L² norm by Parseval.
    pub fn l2_norm_squared(&self) -> f64 {
        self.grid.volume() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_squared().sqrt()
    }

    /// Largest `|θ̂(-η) - conj θ̂(η)|`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| (self.coeffs[self.grid.negated(i)] - self.coeffs[i].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// The coefficients of the real part of the synthesised field,
    /// `(θ̂(η) + conj θ̂(-η))/2`, which are exactly Hermitian.
    pub fn hermitian_part(&self) -> Self {
        let coeffs = (0..self.coeffs.len())
            .map(|i| 0.5 * (self.coeffs[i] + self.coeffs[self.grid.negated(i)].conj()))
            .collect();
        Self { grid: self.grid, coeffs }
    }

    /// Errors with [`Error::NotMeanFree`] unless `|θ̂(0)|` is negligible.
    pub fn ensure_mean_free(&self) -> Result<()> {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mean = self.coeffs[0].norm();
        if mean > MEAN_TOLERANCE * scale && mean > 1e-300 {
            return Err(Error::NotMeanFree { mean: self.coeffs[0].re });
        }
        Ok(())
    }

    /// Pointwise multiplication of the coefficients by a real multiplier.
    pub fn multiplied(&self, multiplier: &[f64]) -> Self {
        debug_assert_eq!(multiplier.len(), self.coeffs.len());
        Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(multiplier)
                .map(|(c, m)| c * m)
                .collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same_grid(self.grid, other.grid)?;
        Ok(Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_same_grid(self.grid, other.grid)?;
        Ok(Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Coefficient-space inner product `Σ_η conj(a(η)) b(η)` (real part).
    pub fn inner(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }
}

/// A `d`-component velocity field with its divergence-free certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    components: Vec<PhysicalField>,
    divergence_free: bool,
}

impl VectorField {
    /// Builds the field and evaluates the certificate
    /// `max_η |η·û(η)| ≤ 10⁻¹² max|û|`.
    pub fn new(components: Vec<PhysicalField>) -> Result<Self> {
        let grid = components
            .first()
            .ok_or_else(|| Error::DimensionMismatch("vector field without components".into()))?
            .grid();
        if components.len() != grid.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} components on a {}-dimensional grid",
                components.len(),
                grid.dim()
            )));
        }
        for c in &components {
            check_same_grid(grid, c.grid())?;
        }
        let (defect, scale) = super::ops::divergence_defect_parts(&components);
        let divergence_free = defect <= DIVERGENCE_TOLERANCE * scale;
        Ok(Self {
            components,
            divergence_free,
        })
    }

    pub fn grid(&self) -> TorusGrid {
        self.components[0].grid()
    }

    pub fn components(&self) -> &[PhysicalField] {
        &self.components
    }

    pub fn into_components(self) -> Vec<PhysicalField> {
        self.components
    }

    pub fn is_divergence_free(&self) -> bool {
        self.divergence_free
    }

    /// Largest pointwise Euclidean length.
    pub fn max_speed(&self) -> f64 {
        let n = self.grid().len();
        (0..n)
            .map(|i| {
                self.components
                    .iter()
                    .map(|c| c.values()[i].powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

pub(crate) fn check_same_grid(a: TorusGrid, b: TorusGrid) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!(
            "grids differ: {a:?} vs {b:?}"
        )));
    }
    Ok(())
}
