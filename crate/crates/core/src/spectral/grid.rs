use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on `𝕋^d = [0, 2π)^d` with `n` points per axis.
///
/// Storage is row-major: for `d = 2` the flat index is `i0 * n + i1`, where
/// `i0` indexes `x₁` and `i1` indexes `x₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct TorusGrid {
    dim: usize,
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct RawGrid {
    dim: usize,
    n: usize,
}

impl TryFrom<RawGrid> for TorusGrid {
    type Error = Error;
    fn try_from(raw: RawGrid) -> Result<Self> {
        TorusGrid::new(raw.dim, raw.n)
    }
}

impl From<TorusGrid> for RawGrid {
    fn from(g: TorusGrid) -> Self {
        RawGrid { dim: g.dim, n: g.n }
    }
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension {dim} (only 1 and 2)")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "{n} points per axis (need a power of two ≥ 8)"
            )));
        }
        Ok(Self { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of grid points `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Quadrature weight `(2π/n)^d` of a single cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// `(2π)^d`.
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.dim as i32)
    }

    /// Largest usable Littlewood–Paley block index `⌊log₂(n/2)⌋`.
    pub fn k_max(&self) -> usize {
        (self.n / 2).trailing_zeros() as usize
    }

    /// Same grid dimension with twice the points per axis.
    pub fn refined(&self) -> Self {
        Self {
            dim: self.dim,
            n: 2 * self.n,
        }
    }

    /// Signed wave number of a per-axis FFT index; the Nyquist index maps to `-n/2`.
    #[inline]
    pub fn axis_wavenumber(&self, j: usize) -> i64 {
        if j < self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Per-axis FFT index of a signed wave number (taken modulo `n`).
    #[inline]
    pub fn axis_index(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Multi-index of a flat index; the unused second slot is 0 for `d = 1`.
    #[inline]
    pub fn unflatten(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.n, idx % self.n]
        }
    }

    #[inline]
    pub fn flatten(&self, multi: [usize; 2]) -> usize {
        if self.dim == 1 {
            multi[0]
        } else {
            multi[0] * self.n + multi[1]
        }
    }

    /// Wave number `η` of a flat spectral index (second slot 0 for `d = 1`).
    #[inline]
    pub fn wavenumber(&self, idx: usize) -> [i64; 2] {
        let [a, b] = self.unflatten(idx);
        if self.dim == 1 {
            [self.axis_wavenumber(a), 0]
        } else {
            [self.axis_wavenumber(a), self.axis_wavenumber(b)]
        }
    }

    #[inline]
    pub fn wavenumber_norm(&self, idx: usize) -> f64 {
        let [a, b] = self.wavenumber(idx);
        ((a * a + b * b) as f64).sqrt()
    }

    /// Flat index of `-η`.
    #[inline]
    pub fn negated(&self, idx: usize) -> usize {
        let [a, b] = self.unflatten(idx);
        let neg = |j: usize| (self.n - j) % self.n;
        if self.dim == 1 {
            neg(a)
        } else {
            self.flatten([neg(a), neg(b)])
        }
    }

    /// True when some component of `η` sits on the unpaired Nyquist index.
    #[inline]
    pub fn touches_nyquist(&self, idx: usize) -> bool {
        let [a, b] = self.unflatten(idx);
        a == self.n / 2 || (self.dim == 2 && b == self.n / 2)
    }

    /// Physical coordinates of a flat grid index, `x_j = 2π j / n`.
    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let [a, b] = self.unflatten(idx);
        let h = self.spacing();
        [a as f64 * h, if self.dim == 2 { b as f64 * h } else { 0.0 }]
    }

    /// `|η|` for every spectral index.
    pub fn wavenumber_norms(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.wavenumber_norm(i)).collect()
    }
}
