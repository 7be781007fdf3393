use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::besov::{gradient_weights, highpass_weights, kpow, weighted_energy};
use crate::error::{Error, Result};
use crate::littlewood_paley::LPFamily;
use crate::spectral::{
    check_same_grid, dealias_mask, fft_forward_in_place, forward_transform, inverse_real, PhysicalField, SpectralField, TorusGrid,
    VectorField,
};

use super::{FrozenVelocity, Propagator};

/// Velocity coefficients below this fraction of the largest are treated as FFT roundoff.
const VELOCITY_FLUSH: f64 = 1e-13;

/// The three sums of the commutator decomposition, signed so that
/// `d/dt ½‖θ‖²_{bold} + κ‖∇θ‖²_{bold} = I - II + III`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CommutatorTerms {
    pub i: f64,
    pub ii: f64,
    pub iii: f64,
}

impl CommutatorTerms {
    pub fn combined(&self) -> f64 {
        self.i - self.ii + self.iii
    }

    pub fn abs_sum(&self) -> f64 {
        self.i.abs() + self.ii.abs() + self.iii.abs()
    }
}

/// The terms together with the finite-difference left-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    pub terms: CommutatorTerms,
    /// Centered difference of `½‖θ‖²_{bold}` over two micro-steps of size `dt`.
    pub energy_rate: f64,
    /// `κ‖∇θ‖²_{bold}`.
    pub kappa_term: f64,
    /// `|energy_rate + kappa_term - (I - II + III)|`.
    pub residual: f64,
    /// `max(|I|, |II|, |III|, kappa_term)`.
    pub scale: f64,
}

impl CommutatorReport {
    pub fn relative_residual(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual / self.scale
        } else {
            self.residual
        }
    }
}

fn integral(grid: TorusGrid, f: &[f64], g: &[f64]) -> f64 {
    grid.cell_volume() * f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>()
}

struct Kit {
    grid: TorusGrid,
    eta: Vec<[f64; 2]>,
}

impl Kit {
    fn synth(&self, c: &[Complex64]) -> Vec<f64> {
        inverse_real(self.grid, c)
    }

    fn filtered(&self, c: &[Complex64], m: impl Fn(usize) -> f64) -> Vec<Complex64> {
        c.iter().enumerate().map(|(j, v)| v * m(j)).collect()
    }

    /// Components of `∇ψ ∗ f` for the multiplier `m = ψ̂`.
    fn grad_conv(&self, f: &[Complex64], m: &[f64]) -> Vec<Vec<f64>> {
        (0..self.grid.dim())
            .map(|c| {
                let spec: Vec<Complex64> =
                    f.iter().enumerate().map(|(j, v)| v * Complex64::new(0.0, self.eta[j][c] * m[j])).collect();
                self.synth(&spec)
            })
            .collect()
    }

    /// `Σ_c ∂_cψ ∗ (g v_c)` for physical `g` and `v`.
    fn div_conv(&self, g: &[f64], v: &[Vec<f64>], m: &[f64]) -> Vec<f64> {
        let mut acc = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for (c, vc) in v.iter().enumerate() {
            let mut prod: Vec<Complex64> = g.iter().zip(vc).map(|(a, b)| Complex64::new(a * b, 0.0)).collect();
            fft_forward_in_place(self.grid, &mut prod);
            for (j, p) in prod.iter().enumerate() {
                acc[j] += p * Complex64::new(0.0, self.eta[j][c] * m[j]);
            }
        }
        self.synth(&acc)
    }

    fn dot(&self, v: &[Vec<f64>], w: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for (vc, wc) in v.iter().zip(w) {
            for (o, (a, b)) in out.iter_mut().zip(vc.iter().zip(wc)) {
                *o += a * b;
            }
        }
        out
    }
}

fn sums(fam: &LPFamily, theta: &SpectralField, u_hat: &[Vec<Complex64>], a: f64) -> CommutatorTerms {
    let grid = fam.grid();
    let kit = Kit {
        grid,
        eta: (0..grid.len())
            .map(|j| {
                let e = grid.wavenumber(j);
                [e[0] as f64, e[1] as f64]
            })
            .collect(),
    };
    let th = theta.coeffs();
    let theta_x = kit.synth(th);
    let alpha = 2.0 * a - 1.0;
    // Literal sums of the displayed decomposition; the physical rate carries the opposite sign.
    let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
    for k in 1..=fam.k_max() as i64 {
        let w = kpow(k as usize, alpha);
        let m = fam.psi(k - 1);
        let hi_x = kit.synth(&kit.filtered(th, |j| 1.0 - m[j]));
        let lo_u_mult = fam.psi(k + 2);
        let u_hi: Vec<Vec<f64>> =
            u_hat.iter().map(|c| kit.synth(&kit.filtered(c, |j| 1.0 - lo_u_mult[j]))).collect();
        let u_lo: Vec<Vec<f64>> = u_hat
            .iter()
            .map(|c| kit.synth(&kit.filtered(c, |j| if j == 0 { 0.0 } else { lo_u_mult[j] })))
            .collect();
        let th_lo_spec = kit.filtered(th, |j| fam.psi(k + 4)[j]);
        let th_lo_x = kit.synth(&th_lo_spec);

        let g_theta = kit.grad_conv(th, m);
        s1 += w * integral(grid, &hi_x, &kit.dot(&u_hi, &g_theta));
        s2 += w * integral(grid, &hi_x, &kit.div_conv(&theta_x, &u_hi, m));
        let g_lo = kit.grad_conv(&th_lo_spec, m);
        s3 += w * (integral(grid, &hi_x, &kit.dot(&u_lo, &g_lo)) - integral(grid, &hi_x, &kit.div_conv(&th_lo_x, &u_lo, m)));
    }
    CommutatorTerms { i: -s1, ii: -s2, iii: -s3 }
}

/// Projects `θ` and `u` on the dealiased band and flushes velocity roundoff.
fn project(fam: &LPFamily, theta: &SpectralField, u: &VectorField) -> Result<(SpectralField, Vec<Vec<Complex64>>)> {
    let grid = fam.grid();
    check_same_grid(theta.grid(), grid)?;
    check_same_grid(u.grid(), grid)?;
    theta.ensure_mean_free()?;
    let mask = dealias_mask(grid);
    let mut theta = theta.multiplied(&mask);
    theta.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    let mut u_hat: Vec<Vec<Complex64>> =
        u.components().iter().map(|c| forward_transform(c).multiplied(&mask).into_coeffs()).collect();
    let top = u_hat.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
    for c in u_hat.iter_mut().flatten() {
        if c.norm() <= VELOCITY_FLUSH * top {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    Ok((theta, u_hat))
}

fn check_alpha(a: f64) -> Result<()> {
    if !(a >= 0.5 && a.is_finite()) {
        return Err(Error::InvalidExponent { value: a, reason: "the commutator weight needs 2a - 1 ≥ 0" });
    }
    Ok(())
}

/// The sums `I`, `II`, `III` alone, without the finite-difference check.
pub fn commutator_sums(theta: &SpectralField, u: &VectorField, a: f64, fam: &LPFamily) -> Result<CommutatorTerms> {
    check_alpha(a)?;
    let (theta, u_hat) = project(fam, theta, u)?;
    Ok(sums(fam, &theta, &u_hat, a))
}

/// Evaluates the commutator sums over `k ≤ k_max` with weight `k^{2a-1}`, and
/// checks them against `d/dt ½‖θ‖²_{bold} + κ‖∇θ‖²_{bold}` measured by two
/// frozen-velocity solver micro-steps of size `±dt`.
///
/// `θ` and `u` are first projected on the dealiased band, which leaves solver
/// states unchanged and makes every grid product exact.
pub fn commutator_terms(
    theta: &SpectralField,
    u: &VectorField,
    a: f64,
    kappa: f64,
    fam: &LPFamily,
    dt: f64,
) -> Result<CommutatorReport> {
    let grid = fam.grid();
    check_alpha(a)?;
    if !(dt > 0.0 && dt.is_finite()) || !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter("commutator check needs dt > 0 and κ ≥ 0".into()));
    }
    let (theta, u_hat) = project(fam, theta, u)?;
    let mut prop = Propagator::new(grid, kappa, true);
    let u_band = VectorField::new(
        u_hat.iter().map(|c| PhysicalField::new(grid, inverse_real(grid, c))).collect::<Result<Vec<_>>>()?,
    )?;
    let frozen = FrozenVelocity::new(&u_band, None);
    prop.check_cfl(dt, &frozen)?;

    let terms = sums(fam, &theta, &u_hat, a);

    let w = highpass_weights(fam, a);
    let kappa_term = kappa * weighted_energy(&theta, &gradient_weights(grid, &w));
    let mut plus = theta.coeffs().to_vec();
    prop.step(&mut plus, dt, &frozen);
    let mut minus = theta.coeffs().to_vec();
    prop.step(&mut minus, -dt, &frozen);
    let q = |c: Vec<Complex64>| 0.5 * weighted_energy(&SpectralField::from_raw(grid, c), &w);
    let energy_rate = (q(plus) - q(minus)) / (2.0 * dt);
    let residual = (energy_rate + kappa_term - terms.combined()).abs();
    let scale = terms.i.abs().max(terms.ii.abs()).max(terms.iii.abs()).max(kappa_term);
    Ok(CommutatorReport { terms, energy_rate, kappa_term, residual, scale })
}
