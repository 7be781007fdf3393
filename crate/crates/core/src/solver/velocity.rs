use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::littlewood_paley::smooth_bump;
use crate::spectral::{
    forward_transform, gradient, inverse_real, lq_norm, PhysicalField, TorusGrid, VectorField,
};

fn one() -> f64 {
    1.0
}

/// Parametric divergence-free velocity fields, piecewise constant in time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VelocityModel {
    Zero,
    /// Constant field `c` (second component ignored in 1D).
    Uniform { c: [f64; 2] },
    /// `A (sin x₂, 0)`.
    SteadyShear {
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `A (sin x₂, 0)` on the first half of every period and `A (0, sin x₁)` on the second.
    AlternatingShear {
        #[serde(default = "one")]
        amplitude: f64,
        period: f64,
    },
    /// `u = ∇^⊥ψ` with `ψ = A sin x₁ sin x₂`.
    Cellular {
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `u = A ∇^⊥H` with `H = χ(r/r₀) r^{2-β}` around `(π, π)`, `χ` the smooth
    /// bump, so `|∇u| ~ r^{-β}` and `∇u ∈ L^p` exactly for `p < 2/β`.
    PowerVortex {
        beta: f64,
        r0: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

impl VelocityModel {
    pub fn validate(&self, grid: TorusGrid) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if grid.dim() == 1 && !matches!(self, Self::Zero | Self::Uniform { .. }) {
            return Err(Error::DimensionMismatch(format!(
                "velocity model `{}` needs a 2D grid",
                self.name()
            )));
        }
        match *self {
            Self::Uniform { c } if !c.iter().all(|v| v.is_finite()) => bad("non-finite uniform velocity".into()),
            Self::SteadyShear { amplitude } | Self::Cellular { amplitude } if !amplitude.is_finite() => {
                bad("non-finite amplitude".into())
            }
            Self::AlternatingShear { amplitude, period } if !(period > 0.0 && period.is_finite() && amplitude.is_finite()) => {
                bad(format!("alternating shear needs a positive period (got {period})"))
            }
            Self::PowerVortex { beta, r0, amplitude } => {
                if !(beta > 0.0 && beta < 1.0) {
                    bad(format!("power vortex needs β ∈ (0, 1) (got {beta})"))
                } else if !(r0 > 0.0 && r0 <= PI) {
                    bad(format!("power vortex needs r₀ ∈ (0, π] (got {r0})"))
                } else if !amplitude.is_finite() {
                    bad("non-finite amplitude".into())
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Uniform { .. } => "uniform",
            Self::SteadyShear { .. } => "steady_shear",
            Self::AlternatingShear { .. } => "alternating_shear",
            Self::Cellular { .. } => "cellular",
            Self::PowerVortex { .. } => "power_vortex",
        }
    }

    /// The same model with its velocity multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut m = self.clone();
        match &mut m {
            Self::Zero => {}
            Self::Uniform { c } => c.iter_mut().for_each(|v| *v *= factor),
            Self::SteadyShear { amplitude }
            | Self::AlternatingShear { amplitude, .. }
            | Self::Cellular { amplitude }
            | Self::PowerVortex { amplitude, .. } => *amplitude *= factor,
        }
        m
    }

    /// Index of the constant-in-time piece containing `t`.
    pub fn phase(&self, t: f64) -> i64 {
        match *self {
            Self::AlternatingShear { period, .. } => (2.0 * t / period).floor() as i64,
            _ => 0,
        }
    }

    /// Switch times strictly inside `(t0, t1)`.
    pub fn breakpoints(&self, t0: f64, t1: f64) -> Vec<f64> {
        match *self {
            Self::AlternatingShear { period, .. } => {
                let half = 0.5 * period;
                let (lo, hi) = (t0.min(t1), t0.max(t1));
                let mut out = Vec::new();
                let mut j = (lo / half).floor() as i64 + 1;
                loop {
                    let s = j as f64 * half;
                    if s >= hi {
                        break;
                    }
                    if s > lo {
                        out.push(s);
                    }
                    j += 1;
                }
                if t1 < t0 {
                    out.reverse();
                }
                out
            }
            _ => Vec::new(),
        }
    }

    /// Component closures of the velocity in the piece containing `t`.
    fn components(&self, t: f64, grid: TorusGrid) -> Vec<PhysicalField> {
        let zero = || PhysicalField::zeros(grid);
        match *self {
            Self::Zero => (0..grid.dim()).map(|_| zero()).collect(),
            Self::Uniform { c } => (0..grid.dim()).map(|i| PhysicalField::from_fn(grid, |_| c[i])).collect(),
            Self::SteadyShear { amplitude } => {
                vec![PhysicalField::from_fn(grid, |x| amplitude * x[1].sin()), zero()]
            }
            Self::AlternatingShear { amplitude, .. } => {
                if self.phase(t).rem_euclid(2) == 0 {
                    vec![PhysicalField::from_fn(grid, |x| amplitude * x[1].sin()), zero()]
                } else {
                    vec![zero(), PhysicalField::from_fn(grid, |x| amplitude * x[0].sin())]
                }
            }
            Self::Cellular { amplitude } => vec![
                PhysicalField::from_fn(grid, |x| -amplitude * x[0].sin() * x[1].cos()),
                PhysicalField::from_fn(grid, |x| amplitude * x[0].cos() * x[1].sin()),
            ],
            Self::PowerVortex { beta, r0, amplitude } => {
                let stream = PhysicalField::from_fn(grid, |x| {
                    let r = (x[0] - PI).hypot(x[1] - PI);
                    amplitude * smooth_bump(r / r0) * r.powf(2.0 - beta)
                });
                let mut spec = forward_transform(&stream);
                // Without its Nyquist modes H differentiates to an exactly solenoidal field.
                for j in 0..grid.len() {
                    if grid.touches_nyquist(j) {
                        spec.coeffs_mut()[j] = Complex64::new(0.0, 0.0);
                    }
                }
                let g = gradient(&spec);
                let dx1 = inverse_real(grid, g[0].coeffs());
                let dx2 = inverse_real(grid, g[1].coeffs());
                vec![
                    PhysicalField::new(grid, dx2.into_iter().map(|v| -v).collect()).expect("finite"),
                    PhysicalField::new(grid, dx1).expect("finite"),
                ]
            }
        }
    }
}

/// Parses `zero`, `uniform:c1,c2`, `steady_shear`, `alternating_shear:period=2`,
/// `cellular:amplitude=0.5` and `power_vortex:beta=0.5,r0=1`. Every model takes
/// an optional `amplitude`.
impl FromStr for VelocityModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unrecognised velocity model `{s}`"));
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let mut named = std::collections::BTreeMap::new();
        let mut positional = Vec::new();
        for part in args.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.split_once('=') {
                Some((k, v)) => {
                    named.insert(k.trim(), v.trim().parse::<f64>().map_err(|_| bad())?);
                }
                None => positional.push(part.parse::<f64>().map_err(|_| bad())?),
            }
        }
        let amplitude = named.remove("amplitude").unwrap_or(1.0);
        let mut take = |key: &str, pos: usize| named.remove(key).or_else(|| positional.get(pos).copied());
        let model = match name {
            "zero" => Self::Zero,
            "uniform" => Self::Uniform { c: [take("c1", 0).unwrap_or(1.0), take("c2", 1).unwrap_or(0.0)] },
            "steady_shear" => Self::SteadyShear { amplitude },
            "alternating_shear" => Self::AlternatingShear { amplitude, period: take("period", 0).ok_or_else(bad)? },
            "cellular" => Self::Cellular { amplitude },
            "power_vortex" => Self::PowerVortex {
                beta: take("beta", 0).ok_or_else(bad)?,
                r0: take("r0", 1).unwrap_or(1.0),
                amplitude,
            },
            _ => return Err(bad()),
        };
        if !named.is_empty() {
            return Err(bad());
        }
        Ok(model)
    }
}

/// Samples the velocity at time `t`.
pub fn sample_velocity(model: &VelocityModel, t: f64, grid: TorusGrid) -> Result<VectorField> {
    model.validate(grid)?;
    VectorField::new(model.components(t, grid))
}

/// `‖∇u‖_{L^p}` with the pointwise Frobenius norm of the Jacobian, computed spectrally.
pub fn gradient_lp_norm(u: &VectorField, p: f64) -> Result<f64> {
    let grid = u.grid();
    let mut frob = vec![0.0; grid.len()];
    for comp in u.components() {
        for d in gradient(&forward_transform(comp)) {
            for (f, v) in frob.iter_mut().zip(inverse_real(grid, d.coeffs())) {
                *f += v * v;
            }
        }
    }
    lq_norm(&PhysicalField::new(grid, frob.into_iter().map(f64::sqrt).collect())?, p)
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidExponent {
            value: p,
            reason: "the velocity integrability exponent must lie in (1, ∞)",
        });
    }
    Ok(())
}

/// Trapezoidal quadrature of `∫ ‖∇u(s)‖_{L^p} ds` over the sample times `t_grid`.
pub fn gradient_lp_time_integral(model: &VelocityModel, p: f64, grid: TorusGrid, t_grid: &[f64]) -> Result<f64> {
    check_p(p)?;
    let values = t_grid
        .iter()
        .map(|&t| gradient_lp_norm(&sample_velocity(model, t, grid)?, p))
        .collect::<Result<Vec<f64>>>()?;
    Ok(t_grid
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum())
}

/// Exact `∫_0^t ‖∇u(s)‖_{L^p} ds` for the piecewise-constant models: one
/// spatial norm per piece times its length.
pub fn gradient_lp_integral(model: &VelocityModel, p: f64, grid: TorusGrid, t: f64) -> Result<f64> {
    check_p(p)?;
    let mut knots = vec![0.0];
    knots.extend(model.breakpoints(0.0, t));
    knots.push(t);
    let mut total = 0.0;
    for w in knots.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        total += (w[1] - w[0]) * gradient_lp_norm(&sample_velocity(model, mid, grid)?, p)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::divergence_defect;

    fn g2(n: usize) -> TorusGrid {
        TorusGrid::new(2, n).unwrap()
    }

    #[test]
    fn shear_and_uniform_samples() {
        let grid = g2(32);
        let u = sample_velocity(&VelocityModel::SteadyShear { amplitude: 1.0 }, 0.0, grid).unwrap();
        assert!(u.is_divergence_free());
        assert!((u.components()[0].values()[grid.flatten([0, 8])] - 1.0).abs() < 1e-15);
        let c = sample_velocity(&VelocityModel::Uniform { c: [1.0, 0.0] }, 0.0, grid).unwrap();
        assert!(c.is_divergence_free());
        assert_eq!(c.max_speed(), 1.0);
    }

    #[test]
    fn every_model_is_divergence_free() {
        let grid = g2(64);
        for m in [
            VelocityModel::Zero,
            VelocityModel::Cellular { amplitude: 2.0 },
            VelocityModel::AlternatingShear { amplitude: 1.0, period: 2.0 },
            VelocityModel::PowerVortex { beta: 0.5, r0: 2.0, amplitude: 1.0 },
        ] {
            for t in [0.0, 1.5] {
                let u = sample_velocity(&m, t, grid).unwrap();
                assert!(u.is_divergence_free(), "{m:?}: {}", divergence_defect(&u));
            }
        }
    }

    #[test]
    fn one_dimensional_models() {
        let grid = TorusGrid::new(1, 16).unwrap();
        assert!(sample_velocity(&VelocityModel::Uniform { c: [0.3, 0.0] }, 0.0, grid).is_ok());
        assert!(matches!(
            sample_velocity(&VelocityModel::SteadyShear { amplitude: 1.0 }, 0.0, grid),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn parameter_validation() {
        let grid = g2(16);
        for m in [
            VelocityModel::PowerVortex { beta: 1.2, r0: 1.0, amplitude: 1.0 },
            VelocityModel::PowerVortex { beta: 0.5, r0: 4.0, amplitude: 1.0 },
            VelocityModel::AlternatingShear { amplitude: 1.0, period: 0.0 },
        ] {
            assert!(sample_velocity(&m, 0.0, grid).is_err());
        }
    }

    #[test]
    fn parses_models() {
        assert_eq!("zero".parse::<VelocityModel>().unwrap(), VelocityModel::Zero);
        assert_eq!("uniform:0.5,-1".parse::<VelocityModel>().unwrap(), VelocityModel::Uniform { c: [0.5, -1.0] });
        assert_eq!(
            "alternating_shear:period=2,amplitude=0.5".parse::<VelocityModel>().unwrap(),
            VelocityModel::AlternatingShear { amplitude: 0.5, period: 2.0 }
        );
        assert_eq!(
            "power_vortex:beta=0.5".parse::<VelocityModel>().unwrap(),
            VelocityModel::PowerVortex { beta: 0.5, r0: 1.0, amplitude: 1.0 }
        );
        assert!("alternating_shear".parse::<VelocityModel>().is_err());
        assert!("cellular:speed=2".parse::<VelocityModel>().is_err());
        assert!("vortex".parse::<VelocityModel>().is_err());
    }

    #[test]
    fn breakpoints_and_phases() {
        let m = VelocityModel::AlternatingShear { amplitude: 1.0, period: 2.0 };
        assert_eq!(m.breakpoints(0.0, 3.0), vec![1.0, 2.0]);
        assert_eq!(m.breakpoints(1.0, 2.0), Vec::<f64>::new());
        assert_eq!(m.breakpoints(2.5, 0.5), vec![2.0, 1.0]);
        assert_eq!(m.phase(0.99), 0);
        assert_eq!(m.phase(1.0), 1);
    }

    #[test]
    fn shear_gradient_integrals() {
        let grid = g2(32);
        let expected = PI * 2f64.sqrt();
        let shear = VelocityModel::SteadyShear { amplitude: 1.0 };
        let ts: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        assert!((gradient_lp_time_integral(&shear, 2.0, grid, &ts).unwrap() - expected).abs() < 1e-12);
        assert_eq!(gradient_lp_time_integral(&VelocityModel::Zero, 2.0, grid, &ts).unwrap(), 0.0);
        let period = 0.8;
        let alt = VelocityModel::AlternatingShear { amplitude: 1.0, period };
        let ts: Vec<f64> = (0..=40).map(|i| i as f64 * 2.0 * period / 40.0).collect();
        let v = gradient_lp_time_integral(&alt, 2.0, grid, &ts).unwrap();
        assert!((v - 2.0 * period * expected).abs() < 1e-12);
        let exact = gradient_lp_integral(&alt, 2.0, grid, 2.0 * period).unwrap();
        assert!((exact - 2.0 * period * expected).abs() < 1e-12);
    }

    #[test]
    fn power_vortex_integrability_threshold() {
        // ‖∇u‖^p_p = smooth bulk + core part; the core grows like n^{pβ-2}. The
        // bulk converges spectrally, so successive increments expose the core.
        let m = VelocityModel::PowerVortex { beta: 0.5, r0: 2.0, amplitude: 1.0 };
        let increments = |p: f64| -> Vec<f64> {
            let v: Vec<f64> = [256, 512, 1024]
                .iter()
                .map(|&n| gradient_lp_norm(&sample_velocity(&m, 0.0, g2(n)).unwrap(), p).unwrap().powf(p))
                .collect();
            vec![v[1] - v[0], v[2] - v[1]]
        };
        let above = increments(6.0);
        let ratio = above[1] / above[0];
        assert!((1.8..2.2).contains(&ratio), "{above:?}");
        let below = increments(3.0);
        assert!(below[1].abs() < 0.85 * below[0].abs(), "{below:?}");
    }
}
