use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{
    dealias_mask, fft_forward_in_place, fft_inverse_in_place, forward_transform, inverse_real, SpectralField, TorusGrid,
    VectorField,
};

/// Courant number: `|dt| max|u| ≤ CFL · 2π/n`.
pub const CFL: f64 = 0.5;

/// A velocity frozen for the duration of a step, on the grid, after dealiasing,
/// split into its spatial mean and the mean-free fluctuation.
#[derive(Clone, Debug)]
pub(crate) struct FrozenVelocity {
    pub mean: [f64; 2],
    pub components: Vec<Vec<f64>>,
    pub max_speed: f64,
}

impl FrozenVelocity {
    pub fn new(u: &VectorField, mask: Option<&[f64]>) -> Self {
        let grid = u.grid();
        let mut mean = [0.0; 2];
        let mut components = Vec::with_capacity(grid.dim());
        for (i, c) in u.components().iter().enumerate() {
            let mut spec = forward_transform(c);
            if let Some(m) = mask {
                spec = spec.multiplied(m);
            }
            mean[i] = spec.coeffs()[0].re;
            spec.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
            // Roundoff left in the transform of a constant field is not a fluctuation.
            let top = spec.max_abs();
            if top <= 1e-14 * mean[i].abs() {
                spec = SpectralField::zeros(grid);
            }
            components.push(inverse_real(grid, spec.coeffs()));
        }
        let max_speed = (0..grid.len())
            .map(|i| components.iter().zip(mean).map(|(c, m)| (c[i] + m).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        let fluctuating = components.iter().any(|c| c.iter().any(|v| *v != 0.0));
        if !fluctuating {
            components.clear();
        }
        Self { mean, components, max_speed }
    }

    /// No spatially varying part: the step is a pure Fourier multiplier.
    pub fn is_uniform(&self) -> bool {
        self.components.is_empty()
    }
}

/// Integrating-factor RK4 for `∂_t v = -P(u'·∇v) - (κ|η|² + i ū·η) v` in
/// coefficient space, where `u = ū + u'` splits off the spatial mean and `P` is
/// the 2/3-rule projection (identity when dealiasing is off). The linear part,
/// diffusion and mean transport, is integrated exactly.
#[derive(Clone, Debug)]
pub(crate) struct Propagator {
    grid: TorusGrid,
    kappa: f64,
    mask: Vec<f64>,
    /// Wavenumbers used for differentiation, Nyquist entries zeroed.
    deriv: Vec<[f64; 2]>,
    lap: Vec<f64>,
    factors: Option<(f64, [f64; 2], Vec<Complex64>, Vec<Complex64>)>,
}

impl Propagator {
    pub fn new(grid: TorusGrid, kappa: f64, dealias: bool) -> Self {
        let n = grid.n() as i64;
        let deriv = (0..grid.len())
            .map(|i| {
                let eta = grid.wavenumber(i);
                let f = |k: i64| if 2 * k.abs() == n { 0.0 } else { k as f64 };
                [f(eta[0]), f(eta[1])]
            })
            .collect();
        let lap = (0..grid.len())
            .map(|i| {
                let [a, b] = grid.wavenumber(i);
                (a * a + b * b) as f64
            })
            .collect();
        let mask = if dealias { dealias_mask(grid) } else { vec![1.0; grid.len()] };
        Self { grid, kappa, mask, deriv, lap, factors: None }
    }

    pub fn mask(&self) -> &[f64] {
        &self.mask
    }

    /// `out = -P(u·∇v)` with the zero mode pinned to 0.
    fn nonlinear(&self, v: &[Complex64], u: &FrozenVelocity, out: &mut [Complex64]) {
        let grid = self.grid;
        let i = Complex64::i();
        if grid.dim() == 1 {
            for ((o, c), d) in out.iter_mut().zip(v).zip(&self.deriv) {
                *o = i * d[0] * c;
            }
            fft_inverse_in_place(grid, out);
            for (o, u0) in out.iter_mut().zip(&u.components[0]) {
                *o = Complex64::new(u0 * o.re, 0.0);
            }
        } else {
            // One synthesis yields both derivatives: ∂₁v in the real part, ∂₂v in the imaginary part.
            for ((o, c), d) in out.iter_mut().zip(v).zip(&self.deriv) {
                *o = c * Complex64::new(-d[1], d[0]);
            }
            fft_inverse_in_place(grid, out);
            let (u1, u2) = (&u.components[0], &u.components[1]);
            for (k, o) in out.iter_mut().enumerate() {
                *o = Complex64::new(u1[k] * o.re + u2[k] * o.im, 0.0);
            }
        }
        fft_forward_in_place(grid, out);
        for (o, m) in out.iter_mut().zip(&self.mask) {
            *o *= -m;
        }
        out[0] = Complex64::new(0.0, 0.0);
    }

    fn ensure_factors(&mut self, h: f64, mean: [f64; 2]) {
        if matches!(&self.factors, Some((ch, cm, _, _)) if *ch == h && *cm == mean) {
            return;
        }
        let rate: Vec<Complex64> = (0..self.grid.len())
            .map(|j| {
                let eta = self.grid.wavenumber(j);
                let drift = mean[0] * eta[0] as f64 + mean[1] * eta[1] as f64;
                Complex64::new(-self.kappa * self.lap[j], -drift)
            })
            .collect();
        let full = rate.iter().map(|r| (r * h).exp()).collect();
        let half = rate.iter().map(|r| (r * (0.5 * h)).exp()).collect();
        self.factors = Some((h, mean, full, half));
    }

    pub fn check_cfl(&self, h: f64, u: &FrozenVelocity) -> Result<()> {
        let bound = CFL * self.grid.spacing();
        if h.abs() * u.max_speed > bound * (1.0 + 1e-12) {
            return Err(Error::StepSize {
                dt: h,
                bound: if u.max_speed > 0.0 { bound / u.max_speed } else { f64::INFINITY },
            });
        }
        Ok(())
    }

    /// One step of size `h` (negative `h` integrates backwards).
    pub fn step(&mut self, v: &mut [Complex64], h: f64, u: &FrozenVelocity) {
        self.ensure_factors(h, u.mean);
        let (_, _, e, e2) = self.factors.as_ref().expect("factors set");
        if u.is_uniform() {
            v.iter_mut().zip(e).for_each(|(c, f)| *c *= f);
            v[0] = Complex64::new(0.0, 0.0);
            return;
        }
        let len = v.len();
        let zero = Complex64::new(0.0, 0.0);
        let (mut k1, mut k2, mut k3, mut k4) = (vec![zero; len], vec![zero; len], vec![zero; len], vec![zero; len]);
        let mut w = vec![zero; len];

        self.nonlinear(v, u, &mut k1);
        for j in 0..len {
            w[j] = e2[j] * (v[j] + 0.5 * h * k1[j]);
        }
        self.nonlinear(&w, u, &mut k2);
        for j in 0..len {
            w[j] = e2[j] * v[j] + 0.5 * h * k2[j];
        }
        self.nonlinear(&w, u, &mut k3);
        for j in 0..len {
            w[j] = e[j] * v[j] + h * e2[j] * k3[j];
        }
        self.nonlinear(&w, u, &mut k4);
        for j in 0..len {
            v[j] = e[j] * v[j] + h / 6.0 * (e[j] * k1[j] + 2.0 * e2[j] * (k2[j] + k3[j]) + k4[j]);
        }
        v[0] = zero;
    }
}
