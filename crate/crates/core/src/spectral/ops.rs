use num_complex::Complex64;

use super::field::{PhysicalField, SpectralField, VectorField};
use super::grid::TorusGrid;
use super::transform::{forward_transform, inverse_real};
use crate::error::{Error, Result};

/// Rectangle-rule `L^q` norm `((2π/n)^d Σ|f|^q)^{1/q}`; `q = ∞` gives `max|f|`.
pub fn lq_norm(f: &PhysicalField, q: f64) -> Result<f64> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::InvalidExponent {
            value: q,
            reason: "L^q norms need q ≥ 1",
        });
    }
    if q.is_infinite() {
        return Ok(f.max_abs());
    }
    let h = f.grid().cell_volume();
    let sum: f64 = if q == 2.0 {
        f.values().iter().map(|v| v * v).sum()
    } else if q == 1.0 {
        f.values().iter().map(|v| v.abs()).sum()
    } else {
        f.values().iter().map(|v| v.abs().powf(q)).sum()
    };
    Ok((h * sum).powf(1.0 / q))
}

/// Spectral gradient: component `i` has coefficients `iη_i θ̂(η)`, Nyquist modes zeroed.
pub fn gradient(f: &SpectralField) -> Vec<SpectralField> {
    let grid = f.grid();
    (0..grid.dim())
        .map(|axis| {
            let coeffs = f
                .coeffs()
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let multi = grid.unflatten(i);
                    if multi[axis] == grid.n() / 2 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        let k = grid.wavenumber(i)[axis] as f64;
                        c * Complex64::new(0.0, k)
                    }
                })
                .collect();
            SpectralField::from_raw(grid, coeffs)
        })
        .collect()
}

/// Leray projection `û ← û - η(η·û)/|η|²` for `η ≠ 0`.
pub fn project_divergence_free(v: &VectorField) -> Result<VectorField> {
    let grid = v.grid();
    let spectra: Vec<SpectralField> = v.components().iter().map(forward_transform).collect();
    let mut out: Vec<Vec<Complex64>> = spectra.iter().map(|s| s.coeffs().to_vec()).collect();
    for i in 1..grid.len() {
        let eta = grid.wavenumber(i);
        let eta = [eta[0] as f64, eta[1] as f64];
        let norm2: f64 = eta[..grid.dim()].iter().map(|e| e * e).sum();
        let dot: Complex64 = (0..grid.dim()).map(|a| spectra[a].coeffs()[i] * eta[a]).sum();
        for (a, comp) in out.iter_mut().enumerate() {
            comp[i] -= dot * (eta[a] / norm2);
        }
    }
    // The Nyquist rows have no partner of opposite sign; dropping them keeps
    // the projected field real and exactly solenoidal.
    for comp in out.iter_mut() {
        for (i, c) in comp.iter_mut().enumerate() {
            if grid.touches_nyquist(i) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }
    let components = out
        .iter()
        .map(|c| PhysicalField::from_raw(grid, inverse_real(grid, c)))
        .collect();
    VectorField::new(components)
}

/// `max|f|` sampled on a grid `factor` times finer by zero padding, a much
/// closer estimate of the supremum of the trigonometric polynomial than the
/// coarse samples. Nyquist coefficients are split symmetrically.
pub fn oversampled_max_abs(f: &SpectralField, factor: usize) -> Result<f64> {
    let grid = f.grid();
    let fine_n = grid.n() * factor.max(1);
    let fine = TorusGrid::new(grid.dim(), fine_n)?;
    let n = grid.n() as i64;
    let mut data = vec![Complex64::new(0.0, 0.0); fine.len()];
    for (i, c) in f.coeffs().iter().enumerate() {
        let eta = grid.wavenumber(i);
        let images = |k: i64| if 2 * k.abs() == n { vec![k.abs(), -k.abs()] } else { vec![k] };
        let (xs, ys) = (images(eta[0]), if grid.dim() == 2 { images(eta[1]) } else { vec![0] });
        let share = *c / (xs.len() * ys.len()) as f64;
        for &a in &xs {
            for &b in &ys {
                let idx = if grid.dim() == 1 {
                    fine.axis_index(a)
                } else {
                    fine.flatten([fine.axis_index(a), fine.axis_index(b)])
                };
                data[idx] += share;
            }
        }
    }
    Ok(inverse_real(fine, &data).into_iter().fold(0.0, |m, v| m.max(v.abs())))
}

/// Subtracts the arithmetic mean, i.e. sets `θ̂(0) = 0`.
pub fn remove_mean(f: &PhysicalField) -> PhysicalField {
    let m = f.mean();
    PhysicalField::from_raw(f.grid(), f.values().iter().map(|v| v - m).collect())
}

/// Indicator of the modes kept by the 2/3 rule (every `|η_i| ≤ n/3`).
pub fn dealias_mask(grid: TorusGrid) -> Vec<f64> {
    let n = grid.n() as i64;
    (0..grid.len())
        .map(|i| {
            let [a, b] = grid.wavenumber(i);
            if 3 * a.abs() > n || 3 * b.abs() > n {
                0.0
            } else {
                1.0
            }
        })
        .collect()
}

/// 2/3-rule truncation: coefficients with any `|η_i| > n/3` are zeroed.
pub fn dealias(f: &SpectralField) -> SpectralField {
    f.multiplied(&dealias_mask(f.grid()))
}

/// Returns `(max_η |η·û(η)|, max|û|)` for the given components.
pub(crate) fn divergence_defect_parts(components: &[PhysicalField]) -> (f64, f64) {
    let grid = components[0].grid();
    let spectra: Vec<SpectralField> = components.iter().map(forward_transform).collect();
    let mut defect: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..grid.len() {
        let eta = grid.wavenumber(i);
        let mut dot = Complex64::new(0.0, 0.0);
        for (a, s) in spectra.iter().enumerate() {
            let c = s.coeffs()[i];
            scale = scale.max(c.norm());
            dot += c * eta[a] as f64;
        }
        defect = defect.max(dot.norm());
    }
    (defect, scale)
}

/// `max_η |η·û(η)| / max|û|` (0 for the zero field).
pub fn divergence_defect(v: &VectorField) -> f64 {
    let (d, s) = divergence_defect_parts(v.components());
    if s == 0.0 {
        0.0
    } else {
        d / s
    }
}
