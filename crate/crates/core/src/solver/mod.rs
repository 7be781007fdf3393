//! Pseudo-spectral integration of `∂_t θ + u·∇θ = κΔθ` on the torus.
//!
//! Advection is stepped with classical RK4 in integrating-factor form, the
//! diffusion multiplier `e^{-κ|η|²t}` being applied exactly. Every nonlinear
//! product is dealiased by the 2/3 rule. Velocity models are piecewise constant
//! in time: a step never straddles a switch time and samples the velocity at
//! its midpoint.

mod commutator;
mod observe;
mod propagator;
mod velocity;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use commutator::{commutator_sums, commutator_terms, CommutatorReport, CommutatorTerms};
pub use observe::{parse_diagnostics, ConservationReport, Diagnostic, ObserverSet, TimeSeries};
pub use propagator::CFL;
pub use velocity::{gradient_lp_integral, gradient_lp_norm, gradient_lp_time_integral, sample_velocity, VelocityModel};

pub(crate) use propagator::{FrozenVelocity, Propagator};

use crate::besov::{block_weights, gradient_weights, weighted_energy};
use crate::error::{Error, Result};
use crate::littlewood_paley::LPFamily;
use crate::spectral::{check_same_grid, forward_transform, oversampled_max_abs, PhysicalField, SpectralField, TorusGrid};

/// Physical and numerical parameters of a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid: TorusGrid,
    pub kappa: f64,
    /// Maximal time step; intervals are split into equal steps no longer than this.
    pub dt: f64,
    pub dealias: bool,
}

impl SolverConfig {
    pub fn new(grid: TorusGrid, kappa: f64, dt: f64) -> Result<Self> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!("diffusivity must be finite and nonnegative (got {kappa})")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("time step must be positive (got {dt})")));
        }
        Ok(Self { grid, kappa, dt, dealias: true })
    }

    pub fn with_dealias(mut self, on: bool) -> Self {
        self.dealias = on;
        self
    }
}

/// Time and coefficients of the scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationState {
    pub t: f64,
    pub theta: SpectralField,
    pub steps: u64,
}

/// Advances a single step of size `config.dt` from `state`.
pub fn step(state: &SimulationState, config: &SolverConfig, model: &VelocityModel) -> Result<SimulationState> {
    check_same_grid(state.theta.grid(), config.grid)?;
    let mut prop = Propagator::new(config.grid, config.kappa, config.dealias);
    let u = frozen(model, state.t + 0.5 * config.dt, config, &prop)?;
    prop.check_cfl(config.dt, &u)?;
    let mut coeffs = state.theta.coeffs().to_vec();
    prop.step(&mut coeffs, config.dt, &u);
    let t = state.t + config.dt;
    check_finite(&coeffs, state.steps + 1, t)?;
    Ok(SimulationState { t, theta: SpectralField::from_raw(config.grid, coeffs), steps: state.steps + 1 })
}

fn frozen(model: &VelocityModel, t: f64, config: &SolverConfig, prop: &Propagator) -> Result<FrozenVelocity> {
    let u = sample_velocity(model, t, config.grid)?;
    Ok(FrozenVelocity::new(&u, config.dealias.then(|| prop.mask())))
}

fn check_finite(coeffs: &[Complex64], step: u64, t: f64) -> Result<()> {
    let s: f64 = coeffs.iter().map(|c| c.re.abs() + c.im.abs()).sum();
    if s.is_finite() {
        Ok(())
    } else {
        Err(Error::Divergence { step, t })
    }
}

/// A running simulation with its time-integrated dissipation accumulators.
pub struct Simulation {
    config: SolverConfig,
    model: VelocityModel,
    prop: Propagator,
    state: SimulationState,
    velocity: Option<(i64, FrozenVelocity)>,
    /// Per-mode weights `w` and the running trapezoidal value of `∫ Σ w |θ̂|² ds`.
    accumulators: Vec<(Vec<f64>, f64)>,
}

/// Handle of an accumulator registered with [`Simulation::track`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AccumulatorId(usize);

impl Simulation {
    /// Starts from a mean-free initial datum; it is dealiased when the config asks for it.
    pub fn new(config: SolverConfig, model: VelocityModel, theta0: &PhysicalField) -> Result<Self> {
        check_same_grid(theta0.grid(), config.grid)?;
        Self::from_spectral(config, model, forward_transform(theta0), 0.0)
    }

    pub fn from_spectral(config: SolverConfig, model: VelocityModel, theta0: SpectralField, t0: f64) -> Result<Self> {
        check_same_grid(theta0.grid(), config.grid)?;
        theta0.ensure_mean_free()?;
        model.validate(config.grid)?;
        let prop = Propagator::new(config.grid, config.kappa, config.dealias);
        let mut theta = if config.dealias { theta0.multiplied(prop.mask()) } else { theta0 };
        theta.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
        let grad = gradient_weights(config.grid, &vec![1.0; config.grid.len()]);
        Ok(Self {
            config,
            model,
            prop,
            state: SimulationState { t: t0, theta, steps: 0 },
            velocity: None,
            accumulators: vec![(grad, 0.0)],
        })
    }

    /// Registers `∫ Σ_η w(η) |θ̂(η)|² ds` (times `(2π)^d`), accumulated from now on.
    pub fn track(&mut self, weights: Vec<f64>) -> Result<AccumulatorId> {
        if weights.len() != self.config.grid.len() {
            return Err(Error::DimensionMismatch("accumulator weights do not match the grid".into()));
        }
        self.accumulators.push((weights, 0.0));
        Ok(AccumulatorId(self.accumulators.len() - 1))
    }

    pub fn accumulated(&self, id: AccumulatorId) -> f64 {
        self.accumulators[id.0].1
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn model(&self) -> &VelocityModel {
        &self.model
    }

    pub fn state(&self) -> &SimulationState {
        &self.state
    }

    pub fn t(&self) -> f64 {
        self.state.t
    }

    pub fn theta(&self) -> &SpectralField {
        &self.state.theta
    }

    /// `2κ ∫ ‖∇θ‖²_{L²} ds` since the start.
    pub fn dissipation(&self) -> f64 {
        2.0 * self.config.kappa * self.accumulators[0].1
    }

    fn velocity_at(&mut self, t: f64) -> Result<&FrozenVelocity> {
        let phase = self.model.phase(t);
        if !matches!(&self.velocity, Some((p, _)) if *p == phase) {
            let u = frozen(&self.model, t, &self.config, &self.prop)?;
            self.prop.check_cfl(self.config.dt, &u)?;
            self.velocity = Some((phase, u));
        }
        Ok(&self.velocity.as_ref().expect("velocity cached").1)
    }

    fn advance_segment(&mut self, t1: f64) -> Result<()> {
        let t0 = self.state.t;
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(());
        }
        let steps = ((span / self.config.dt) * (1.0 - 1e-12)).ceil().max(1.0) as u64;
        let h = span / steps as f64;
        let u = self.velocity_at(t0 + 0.5 * span)?.clone();
        let mut before: Vec<f64> = self.accumulators.iter().map(|(w, _)| weighted_energy(&self.state.theta, w)).collect();
        for s in 0..steps {
            self.prop.step(self.state.theta.coeffs_mut(), h, &u);
            self.state.steps += 1;
            let t = if s + 1 == steps { t1 } else { t0 + (s + 1) as f64 * h };
            check_finite(self.state.theta.coeffs(), self.state.steps, t)?;
            self.state.t = t;
            for ((w, acc), b) in self.accumulators.iter_mut().zip(before.iter_mut()) {
                let after = weighted_energy(&self.state.theta, w);
                *acc += 0.5 * h * (*b + after);
                *b = after;
            }
        }
        Ok(())
    }

    /// Integrates up to time `t`, splitting at velocity switch times.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        if !(t.is_finite() && t >= self.state.t) {
            return Err(Error::InvalidParameter(format!("cannot advance from t = {} to t = {t}", self.state.t)));
        }
        for b in self.model.breakpoints(self.state.t, t) {
            self.advance_segment(b)?;
        }
        self.advance_segment(t)
    }
}

/// Integrates from `θ₀` to `t_end`, recording `observers` at each sampling time.
///
/// Sampling times beyond `t_end` are ignored. The conservation report is
/// always filled in, whichever diagnostics were requested.
pub fn solve(
    config: &SolverConfig,
    model: &VelocityModel,
    theta0: &PhysicalField,
    t_end: f64,
    observers: &ObserverSet,
) -> Result<TimeSeries> {
    let mut sim = Simulation::new(*config, model.clone(), theta0)?;
    let needs_fam = observers.diagnostics.iter().any(|d| matches!(d, Diagnostic::Besov { .. } | Diagnostic::BesovDissipation { .. }));
    let fam = needs_fam.then(|| LPFamily::standard(config.grid));
    let mut besov_acc = Vec::new();
    for d in &observers.diagnostics {
        if let Diagnostic::BesovDissipation { a } = *d {
            let w = gradient_weights(config.grid, &block_weights(fam.as_ref().expect("family built"), a));
            besov_acc.push(sim.track(w)?);
        }
    }
    let l2_0 = sim.theta().l2_norm();
    // The maximum principle compares grid samples with the supremum of the datum.
    let linf_0 = oversampled_max_abs(sim.theta(), 4)?;
    let mut conservation = ConservationReport { l2_monotone: true, ..Default::default() };
    let mut last_l2 = l2_0;
    let mut series = TimeSeries {
        columns: observers.diagnostics.iter().map(Diagnostic::column).collect(),
        times: Vec::new(),
        rows: Vec::new(),
        conservation: ConservationReport::default(),
    };
    for &t in observers.times.iter().filter(|&&t| t <= t_end) {
        sim.advance_to(t)?;
        let theta = sim.theta();
        let mut row = Vec::with_capacity(observers.diagnostics.len());
        let mut next_acc = besov_acc.iter();
        for d in &observers.diagnostics {
            row.push(match d {
                Diagnostic::Dissipation => sim.dissipation(),
                Diagnostic::BesovDissipation { .. } => config.kappa * sim.accumulated(*next_acc.next().expect("tracked")),
                other => other.instantaneous(fam.as_ref(), theta)?,
            });
        }
        let l2 = theta.l2_norm();
        let linf = crate::spectral::inverse_transform(theta)?.max_abs();
        conservation.mean_max = conservation.mean_max.max(theta.coeffs()[0].norm());
        if l2_0 > 0.0 {
            conservation.l2_drift = conservation.l2_drift.max((l2 - l2_0).abs() / l2_0);
            let balance = (l2 * l2 + sim.dissipation() - l2_0 * l2_0).abs() / (l2_0 * l2_0);
            conservation.energy_balance = conservation.energy_balance.max(balance);
        }
        if linf_0 > 0.0 {
            conservation.linf_growth = conservation.linf_growth.max(linf / linf_0 - 1.0);
        }
        conservation.l2_monotone &= l2 <= last_l2 * (1.0 + 1e-14);
        last_l2 = l2;
        series.times.push(t);
        series.rows.push(row);
    }
    series.conservation = conservation;
    Ok(series)
}
