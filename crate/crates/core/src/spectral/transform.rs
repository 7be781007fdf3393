use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::field::{PhysicalField, SpectralField};
use super::grid::TorusGrid;
use crate::error::{Error, Result};

/// Relative tolerance of the Hermitian-symmetry precondition of the inverse transform.
const HERMITIAN_TOLERANCE: f64 = 1e-10;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if forward {
            p.plan_fft_forward(n)
        } else {
            p.plan_fft_inverse(n)
        }
    })
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const BLOCK: usize = 16;
    for ib in (0..n).step_by(BLOCK) {
        for jb in (0..n).step_by(BLOCK) {
            for i in ib..(ib + BLOCK).min(n) {
                for j in jb..(jb + BLOCK).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}

/// Unnormalised multi-dimensional DFT along every axis.
fn dft_in_place(grid: TorusGrid, data: &mut [Complex64], forward: bool) {
    let n = grid.n();
    let fft = plan(n, forward);
    // rustfft processes every contiguous chunk of length n.
    fft.process(data);
    if grid.dim() == 2 {
        let mut tmp = vec![Complex64::new(0.0, 0.0); data.len()];
        transpose(data, &mut tmp, n);
        fft.process(&mut tmp);
        transpose(&tmp, data, n);
    }
}

/// In place `c(η) = n^{-d} Σ_x f(x) e^{-iη·x}`.
pub(crate) fn fft_forward_in_place(grid: TorusGrid, data: &mut [Complex64]) {
    dft_in_place(grid, data, true);
    let scale = 1.0 / grid.len() as f64;
    data.iter_mut().for_each(|c| *c *= scale);
}

/// In place `f(x) = Σ_η c(η) e^{iη·x}`.
pub(crate) fn fft_inverse_in_place(grid: TorusGrid, data: &mut [Complex64]) {
    dft_in_place(grid, data, false);
}

/// Inverse transform without the symmetry check; the imaginary part is discarded.
pub(crate) fn inverse_real(grid: TorusGrid, coeffs: &[Complex64]) -> Vec<f64> {
    let mut data = coeffs.to_vec();
    fft_inverse_in_place(grid, &mut data);
    data.into_iter().map(|c| c.re).collect()
}

/// Torus Fourier transform, `θ̂(η) = (1/n^d) Σ_x θ(x) e^{-iη·x}`.
pub fn forward_transform(f: &PhysicalField) -> SpectralField {
    let grid = f.grid();
    let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_forward_in_place(grid, &mut data);
    SpectralField::from_raw(grid, data)
}

/// Fourier synthesis `θ(x) = Σ_η θ̂(η) e^{iη·x}` of a Hermitian coefficient array.
pub fn inverse_transform(spectrum: &SpectralField) -> Result<PhysicalField> {
    let defect = spectrum.hermitian_defect();
    let scale = spectrum.max_abs();
    if defect > HERMITIAN_TOLERANCE * scale {
        return Err(Error::SymmetryViolation { defect });
    }
    let grid = spectrum.grid();
    Ok(PhysicalField::from_raw(grid, inverse_real(grid, spectrum.coeffs())))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::fields::random_band_limited;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn constant_has_only_zero_mode() {
        let g = TorusGrid::new(2, 16).unwrap();
        let s = forward_transform(&PhysicalField::from_fn(g, |_| 3.0));
        assert!((s.coeffs()[0] - Complex64::new(3.0, 0.0)).norm() < 1e-15);
        assert!(s.coeffs()[1..].iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn hermitian_part_repairs_noise_level_spectra() {
        let g = TorusGrid::new(1, 16).unwrap();
        let mut s = SpectralField::zeros(g);
        s.coeffs_mut()[3] = Complex64::new(1e-17, 2e-17);
        assert!(inverse_transform(&s).is_err());
        let h = s.hermitian_part();
        assert_eq!(h.hermitian_defect(), 0.0);
        let f = inverse_transform(&h).unwrap();
        assert!(f.max_abs() < 1e-16);
    }

    #[test]
    fn cosine_splits_into_two_halves() {
        let g = TorusGrid::new(1, 32).unwrap();
        let s = forward_transform(&PhysicalField::from_fn(g, |x| (4.0 * x[0]).cos()));
        for (i, c) in s.coeffs().iter().enumerate() {
            let k = g.wavenumber(i)[0];
            let expected = if k.abs() == 4 { 0.5 } else { 0.0 };
            assert!((c - Complex64::new(expected, 0.0)).norm() < 1e-15, "mode {k}");
        }
    }

    #[test]
    fn second_axis_is_x2() {
        let g = TorusGrid::new(2, 16).unwrap();
        let s = forward_transform(&PhysicalField::from_fn(g, |x| (3.0 * x[1]).sin()));
        // sin(3x₂) = (e^{3ix₂} - e^{-3ix₂}) / 2i
        assert!((s.coeff([0, 3]) - Complex64::new(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn single_mode_synthesises_cosine() {
        let g = TorusGrid::new(1, 16).unwrap();
        let mut s = SpectralField::zeros(g);
        s.set_coeff([1, 0], Complex64::new(0.5, 0.0));
        s.set_coeff([-1, 0], Complex64::new(0.5, 0.0));
        let f = inverse_transform(&s).unwrap();
        let expected = PhysicalField::from_fn(g, |x| x[0].cos());
        assert!(max_diff(f.values(), expected.values()) < 1e-15);
    }

    #[test]
    fn zero_spectrum_gives_zero_field() {
        let g = TorusGrid::new(2, 8).unwrap();
        let f = inverse_transform(&SpectralField::zeros(g)).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_non_hermitian() {
        let g = TorusGrid::new(1, 16).unwrap();
        let mut s = SpectralField::zeros(g);
        s.set_coeff([2, 0], Complex64::new(1.0, 0.0));
        assert!(matches!(
            inverse_transform(&s),
            Err(Error::SymmetryViolation { .. })
        ));
    }

    #[test]
    fn round_trip_on_random_fields() {
        for (dim, n) in [(1, 256), (2, 64)] {
            let g = TorusGrid::new(dim, n).unwrap();
            for seed in 0..5 {
                let f = random_band_limited(g, n / 3, 1.0, seed).unwrap();
                let back = inverse_transform(&forward_transform(&f)).unwrap();
                let scale = f.max_abs();
                assert!(max_diff(f.values(), back.values()) < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn forward_of_inverse_is_identity_on_hermitian_input() {
        let g = TorusGrid::new(2, 32).unwrap();
        // Hermitian spectrum: transform of a random real field.
        let f = random_band_limited(g, 15, 0.0, 11).unwrap();
        let s = forward_transform(&f);
        let again = forward_transform(&inverse_transform(&s).unwrap());
        let err = s
            .coeffs()
            .iter()
            .zip(again.coeffs())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12 * s.max_abs());
    }

    #[test]
    fn sine_grid_values_follow_coordinates() {
        let g = TorusGrid::new(1, 8).unwrap();
        let f = PhysicalField::from_fn(g, |x| x[0]);
        assert!((f.values()[4] - PI).abs() < 1e-15);
    }
}
