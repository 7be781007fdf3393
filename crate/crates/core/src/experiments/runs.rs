use std::collections::BTreeMap;

use super::config::{ExperimentConfig, ExperimentKind};
use super::report::{BoundCheck, ExperimentReport, RateBoundInputs, RateFit, Records};
use crate::besov::{besov_log_norm, block_weights, gradient_weights, homogeneous_sobolev_norm, norm, BesovParams, Flavor};
use crate::error::{Error, Result};
use crate::littlewood_paley::LPFamily;
use crate::solver::{commutator_sums, gradient_lp_integral, gradient_lp_norm, sample_velocity, Simulation, SolverConfig, VelocityModel};
use crate::spectral::{inverse_transform, lq_norm, PhysicalField, TorusGrid};
use crate::transport::{kr_distance, KrOptions, Method};

/// Runs whichever experiment `config.kind` names.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    match config.kind {
        ExperimentKind::Regularity => run_regularity(config),
        ExperimentKind::Diffusive => run_diffusive(config),
        ExperimentKind::Zerodiff => run_zero_diffusivity_sweep(config),
        ExperimentKind::Mixing => run_mixing(config),
    }
}

/// `δ(t) = √(κt) / ln^a(2 + 1/(κt))`.
pub fn weak_scale(kappa: f64, t: f64, a: f64) -> f64 {
    let kt = kappa * t;
    kt.sqrt() / (2.0 + 1.0 / kt).ln().powf(a)
}

/// `ln^{-a}(2 + 1/(κt))`, the rate of the vanishing-diffusivity estimates.
pub fn log_rate(kappa: f64, t: f64, a: f64) -> f64 {
    (2.0 + 1.0 / (kappa * t)).ln().powf(-a)
}

/// Whether two minimal constants from grids `n` and `2n` agree within 25%.
pub fn refinement_stable(c_n: f64, c_2n: f64) -> bool {
    c_n > 0.0 && c_n.is_finite() && c_2n.is_finite() && (c_2n / c_n - 1.0).abs() <= 0.25
}

struct Setup {
    grid: TorusGrid,
    fam: LPFamily,
    theta0: PhysicalField,
    times: Vec<f64>,
}

fn setup(config: &ExperimentConfig, kind: ExperimentKind) -> Result<Setup> {
    if config.kind != kind {
        return Err(Error::Config(format!("expected a `{}` config, got `{}`", kind.name(), config.kind.name())));
    }
    config.validate()?;
    let grid = config.grid()?;
    let theta0 = config.initial.sample(grid)?;
    let m = config.samples;
    let times = (0..=m).map(|i| if i == m { config.t_end } else { config.t_end * i as f64 / m as f64 }).collect();
    Ok(Setup { grid, fam: LPFamily::standard(grid), theta0, times })
}

fn simulation(config: &ExperimentConfig, grid: TorusGrid, kappa: f64, model: VelocityModel, theta0: &PhysicalField) -> Result<Simulation> {
    Simulation::new(SolverConfig::new(grid, kappa, config.dt)?, model, theta0)
}

fn linf(sim: &Simulation) -> Result<f64> {
    Ok(inverse_transform(sim.theta())?.max_abs())
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs <= 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

fn report(config: &ExperimentConfig, inputs: RateBoundInputs, records: Records) -> ExperimentReport {
    ExperimentReport {
        config: config.clone(),
        inputs,
        records,
        checks: Vec::new(),
        fits: Vec::new(),
        summary: BTreeMap::new(),
        flags: BTreeMap::new(),
    }
}

/// Index of the largest entry.
fn argmax(v: &[f64]) -> usize {
    v.iter().enumerate().fold(0, |best, (i, x)| if *x > v[best] { i } else { best })
}

/// Inviscid growth of `‖θ(t)‖_{B^{log,a}}` against `G(t)^a ‖θ₀‖_∞ + ‖θ₀‖_{B^{log,a}}`.
///
/// With `config.commutator` the records also carry the commutator sums, the
/// minimal constant of `|I|+|II|+|III| ≤ C ‖∇u‖_{L^p} ‖θ‖_∞^{1/a} ‖θ‖_{bold}^{(2a-1)/a}`
/// and that of the differential inequality `a (d/dt)‖θ‖_{bold}^{1/a} ≤ C ‖∇u‖_{L^p} ‖θ‖_∞^{1/a}`,
/// whose left side is `‖θ‖_{bold}^{1/a-2} (I - II + III)`.
pub fn run_regularity(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let Setup { grid, fam, theta0, times } = setup(config, ExperimentKind::Regularity)?;
    let a = config.a;
    let mut sim = simulation(config, grid, 0.0, config.velocity.clone(), &theta0)?;
    let inputs0 = RateBoundInputs::new(theta0.max_abs(), besov_log_norm(&fam, sim.theta(), a)?.value, 0.0, a);
    let mut columns = vec!["t", "besov", "l2", "linf", "grad_integral", "rhs", "min_c"];
    if config.commutator {
        columns.extend(["comm_i", "comm_ii", "comm_iii", "comm_bound_rhs", "comm_bound_c", "energy_rate_lhs", "energy_rate_rhs", "energy_rate_c"]);
    }
    let mut records = Records::new(&columns);
    for &t in &times {
        sim.advance_to(t)?;
        let besov = besov_log_norm(&fam, sim.theta(), a)?.value;
        let g = gradient_lp_integral(&config.velocity, config.p, grid, t)?;
        let rhs = inputs0.at(g, a).lambda;
        let sup = linf(&sim)?;
        let mut row = vec![t, besov, sim.theta().l2_norm(), sup, g, rhs, ratio(besov, rhs)];
        if config.commutator {
            let u = sample_velocity(&config.velocity, t, grid)?;
            let terms = commutator_sums(sim.theta(), &u, a, &fam)?;
            let bold = norm(&fam, sim.theta(), BesovParams::new(a, Flavor::Highpass)?)?.value;
            let unit = gradient_lp_norm(&u, config.p)? * sup.powf(1.0 / a);
            let comm_bound_rhs = unit * bold.powf((2.0 * a - 1.0) / a);
            let energy_rate_lhs = if bold > 0.0 { bold.powf(1.0 / a - 2.0) * terms.combined() } else { 0.0 };
            row.extend([
                terms.i,
                terms.ii,
                terms.iii,
                comm_bound_rhs,
                ratio(terms.abs_sum(), comm_bound_rhs),
                energy_rate_lhs,
                unit,
                ratio(energy_rate_lhs, unit),
            ]);
        }
        records.push(row);
    }
    let c = records.column("min_c").expect("column");
    let k = argmax(&c);
    let row = &records.rows[k];
    let mut out = report(config, inputs0.at(row[4], a), records.clone());
    out.checks.push(BoundCheck::new(
        "regularity",
        row[1],
        row[5],
        [
            ("t", row[0]),
            ("besov", row[1]),
            ("grad_integral", row[4]),
            ("linf0", inputs0.linf0),
            ("besov0", inputs0.besov0),
            ("a", a),
            ("p", config.p),
        ],
    ));
    out.summary.insert("sup_min_c".into(), c[k]);
    out.summary.insert("besov0".into(), inputs0.besov0);
    out.summary.insert("linf0".into(), inputs0.linf0);
    out.summary.insert("final_besov".into(), *records.column("besov").expect("column").last().expect("row"));
    if config.commutator {
        for (name, lhs_col, rhs_col, c_col) in [("comm_bound", None, "comm_bound_rhs", "comm_bound_c"), ("energy_rate", Some("energy_rate_lhs"), "energy_rate_rhs", "energy_rate_c")] {
            let cs = records.column(c_col).expect("column");
            let j = argmax(&cs);
            let r = &records.rows[j];
            let at = |col: &str| r[records.columns.iter().position(|c| c == col).expect("column")];
            let lhs = match lhs_col {
                Some(col) => at(col),
                None => at("comm_i").abs() + at("comm_ii").abs() + at("comm_iii").abs(),
            };
            out.checks.push(BoundCheck::new(
                name,
                lhs,
                at(rhs_col),
                [("t", at("t")), ("linf", at("linf")), ("comm_i", at("comm_i")), ("comm_ii", at("comm_ii")), ("comm_iii", at("comm_iii")), ("a", a), ("p", config.p)],
            ));
            out.summary.insert(format!("sup_{c_col}"), cs[j]);
        }
    }
    Ok(out)
}

/// Besov growth plus `(κ ∫₀ᵗ ‖∇θ^κ‖²_{B^{log,a}} ds)^{1/2}` against the same right-hand side.
pub fn run_diffusive(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let Setup { grid, fam, theta0, times } = setup(config, ExperimentKind::Diffusive)?;
    let a = config.a;
    let weights = gradient_weights(grid, &block_weights(&fam, a));
    let mut records = Records::new(&["kappa", "t", "besov", "besov_dissipation", "l2", "grad_integral", "rhs", "min_c", "min_c_dissipation"]);
    let mut inputs0 = RateBoundInputs::default();
    let mut grads = Vec::with_capacity(times.len());
    for &t in &times {
        grads.push(gradient_lp_integral(&config.velocity, config.p, grid, t)?);
    }
    let mut out_checks = Vec::new();
    for &kappa in &config.kappa {
        let mut sim = simulation(config, grid, kappa, config.velocity.clone(), &theta0)?;
        let acc = sim.track(weights.clone())?;
        inputs0 = RateBoundInputs::new(theta0.max_abs(), besov_log_norm(&fam, sim.theta(), a)?.value, 0.0, a);
        let first = records.len();
        for (&t, &g) in times.iter().zip(&grads) {
            sim.advance_to(t)?;
            let besov = besov_log_norm(&fam, sim.theta(), a)?.value;
            let diss = (kappa * sim.accumulated(acc)).sqrt();
            let rhs = inputs0.at(g, a).lambda;
            records.push(vec![kappa, t, besov, diss, sim.theta().l2_norm(), g, rhs, ratio(besov + diss, rhs), ratio(diss, rhs)]);
        }
        let c: Vec<f64> = records.rows[first..].iter().map(|r| r[7]).collect();
        let r = &records.rows[first + argmax(&c)];
        out_checks.push(BoundCheck::new(
            format!("diffusive[kappa={kappa:e}]"),
            r[2] + r[3],
            r[6],
            [
                ("kappa", kappa),
                ("t", r[1]),
                ("besov", r[2]),
                ("besov_dissipation", r[3]),
                ("grad_integral", r[5]),
                ("linf0", inputs0.linf0),
                ("besov0", inputs0.besov0),
                ("a", a),
                ("p", config.p),
            ],
        ));
    }
    let c = records.column("min_c").expect("column");
    let cd = records.column("min_c_dissipation").expect("column");
    let g_end = *grads.last().expect("times");
    let mut out = report(config, inputs0.at(g_end, a), records);
    out.checks = out_checks;
    out.summary.insert("sup_min_c".into(), c[argmax(&c)]);
    out.summary.insert("sup_min_c_dissipation".into(), cd[argmax(&cd)]);
    out.summary.insert("besov0".into(), inputs0.besov0);
    out.summary.insert("linf0".into(), inputs0.linf0);
    Ok(out)
}

/// Errors of `θ^κ` against the inviscid solution at `t = t_end`, one row per `κ`.
///
/// Strong error and dissipation are compared with
/// `ln^{-a}(2 + 1/(κt)) ((1 + G^p)‖θ₀‖_∞ + ‖θ₀‖_B)`; the weak error
/// `D_{δ(t)}(θ, θ^κ)` with `sup_s ‖θ - θ^κ‖_{L^q} G + Λ`, the second term
/// being `(1/δ) √(κt) ln^{-a}(2 + 1/(κt)) Λ` at `δ = δ(t)`.
pub fn run_zero_diffusivity_sweep(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let Setup { grid, fam, theta0, times } = setup(config, ExperimentKind::Zerodiff)?;
    let (a, p, q) = (config.a, config.p, config.q());
    let t = config.t_end;
    let mut reference = simulation(config, grid, 0.0, config.velocity.clone(), &theta0)?;
    let inputs0 = RateBoundInputs::new(theta0.max_abs(), besov_log_norm(&fam, reference.theta(), a)?.value, 0.0, a);
    let mut sims = config
        .kappa
        .iter()
        .map(|&k| simulation(config, grid, k, config.velocity.clone(), &theta0))
        .collect::<Result<Vec<_>>>()?;
    let mut sup_lq = vec![0.0f64; sims.len()];
    for &s in &times {
        reference.advance_to(s)?;
        let ref_phys = inverse_transform(reference.theta())?;
        for (sim, sup) in sims.iter_mut().zip(sup_lq.iter_mut()) {
            sim.advance_to(s)?;
            let diff = ref_phys.sub(&inverse_transform(sim.theta())?)?;
            *sup = sup.max(lq_norm(&diff, q)?);
        }
    }
    let g = gradient_lp_integral(&config.velocity, p, grid, t)?;
    let inputs = inputs0.at(g, a);
    let ref_phys = inverse_transform(reference.theta())?;
    let opts = KrOptions { method: Method::Exact, max_support: Some(config.kr_max_support) };
    let mut records = Records::new(&[
        "kappa",
        "kt",
        "delta",
        "log_rate",
        "strong_error",
        "strong_rhs",
        "strong_c",
        "dissipation",
        "dissipation_c",
        "sup_lq_error",
        "weak_error",
        "weak_rhs",
        "weak_c",
        "coarsening_bound",
        "large_kt",
    ]);
    let mut out_checks = Vec::new();
    for ((sim, &kappa), &sup) in sims.iter().zip(&config.kappa).zip(&sup_lq) {
        let kt = kappa * t;
        let rate = log_rate(kappa, t, a);
        let delta = weak_scale(kappa, t, a);
        let strong = reference.theta().sub(sim.theta())?.l2_norm();
        let strong_rhs = rate * ((1.0 + g.powf(p)) * inputs.linf0 + inputs.besov0);
        let diss = (0.5 * sim.dissipation()).sqrt();
        let kr = kr_distance(&ref_phys, &inverse_transform(sim.theta())?, delta, opts)?;
        let weak_rhs = sup * g + inputs.lambda;
        let large = if kt >= 0.01 { 1.0 } else { 0.0 };
        records.push(vec![
            kappa,
            kt,
            delta,
            rate,
            strong,
            strong_rhs,
            ratio(strong, strong_rhs),
            diss,
            ratio(diss, strong_rhs),
            sup,
            kr.distance,
            weak_rhs,
            ratio(kr.distance, weak_rhs),
            kr.coarsening_bound,
            large,
        ]);
        let common = [("kappa", kappa), ("t", t), ("grad_integral", g), ("linf0", inputs.linf0), ("besov0", inputs.besov0), ("a", a), ("p", p)];
        out_checks.push(BoundCheck::new(
            format!("strong[kappa={kappa:e}]"),
            strong,
            strong_rhs,
            common.into_iter().chain([("log_rate", rate)]),
        ));
        out_checks.push(BoundCheck::new(
            format!("dissipation[kappa={kappa:e}]"),
            diss,
            strong_rhs,
            common.into_iter().chain([("log_rate", rate)]),
        ));
        out_checks.push(BoundCheck::new(
            format!("weak[kappa={kappa:e}]"),
            kr.distance,
            weak_rhs,
            common.into_iter().chain([
                ("delta", delta),
                ("sup_lq_error", sup),
                ("q", q),
                ("lambda", inputs.lambda),
                ("coarsening_radius", kr.radius),
                ("coarsening_bound", kr.coarsening_bound),
            ]),
        ));
    }
    let mut out = report(config, inputs, records.clone());
    out.checks = out_checks;
    for name in ["strong", "dissipation", "weak"] {
        let c = records.column(&format!("{name}_c")).expect("column");
        out.summary.insert(format!("{name}_c"), c[argmax(&c)]);
    }
    let x: Vec<f64> = records.column("kt").expect("column").iter().map(|kt| (2.0 + 1.0 / kt).ln().ln()).collect();
    for (name, col) in [("strong", "strong_error"), ("dissipation", "dissipation"), ("weak", "weak_error")] {
        let y = records.column(col).expect("column");
        if y.iter().all(|v| *v > 0.0) {
            let fit = RateFit::ols(name, x.clone(), y.iter().map(|v| v.ln()).collect())?;
            out.summary.insert(format!("{name}_slope"), fit.slope);
            out.fits.push(fit);
        }
    }
    if let Some(slope) = out.summary_value("strong_slope") {
        out.flags.insert("slope_within_bound".into(), slope <= -a + 0.3);
        out.flags.insert("slope_matched".into(), (slope + a).abs() <= 0.3);
    }
    out.summary.insert("grad_integral".into(), g);
    out.summary.insert("lambda".into(), inputs.lambda);
    Ok(out)
}

/// First time at which `‖θ^κ‖²_{L²}` falls to half its initial value.
///
/// The search runs in steps of `interval` up to `ln 2 / (2κ)`, by which time
/// diffusion alone halves the energy of any mean-free field.
fn half_energy_time(config: &ExperimentConfig, grid: TorusGrid, kappa: f64, model: &VelocityModel, theta0: &PhysicalField, interval: f64) -> Result<Option<f64>> {
    let mut sim = simulation(config, grid, kappa, model.clone(), theta0)?;
    let target = 0.5 * sim.theta().l2_norm_squared();
    let cap = std::f64::consts::LN_2 / (2.0 * kappa);
    let (mut t_prev, mut e_prev) = (0.0, 2.0 * target);
    let mut i = 1u64;
    while t_prev < cap {
        let t = (i as f64 * interval).min(cap * (1.0 + 1e-9));
        sim.advance_to(t)?;
        let e = sim.theta().l2_norm_squared();
        if e <= target {
            // Interpolate ln E linearly between the bracketing samples.
            let s = (e_prev.ln() - target.ln()) / (e_prev.ln() - e.ln());
            return Ok(Some(t_prev + s * (t - t_prev)));
        }
        (t_prev, e_prev) = (t, e);
        i += 1;
    }
    Ok(None)
}

/// Decay of `‖θ(t)‖_{Ḣ^{-1}}` under the velocity rescaled to unit mean gradient,
/// `(⨍|∇u(0)|^p)^{1/p} = 1`, so that `∫₀ᵗ‖∇u‖_{L^p} = (2π)^{d/p} t` for the
/// shear and cellular models.
///
/// `ln‖θ‖_{Ḣ^{-1}}` is fitted affinely in `t` (`λ` = minus the slope) and in
/// `ln(1+t)`; the series is flagged sub-exponential when the power law fits
/// better. For each positive `κ` in the list the half-energy time is
/// reported together with its ratio to `ln(1/κ)`.
pub fn run_mixing(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let Setup { grid, fam: _, theta0, times } = setup(config, ExperimentKind::Mixing)?;
    let mean_norm = gradient_lp_norm(&sample_velocity(&config.velocity, 0.0, grid)?, config.p)? / grid.volume().powf(1.0 / config.p);
    let scale = if mean_norm > 0.0 { 1.0 / mean_norm } else { 1.0 };
    let model = config.velocity.scaled(scale);
    let mut sim = simulation(config, grid, 0.0, model.clone(), &theta0)?;
    let mut records = Records::new(&["t", "hminus1", "ln_hminus1", "l2", "grad_integral"]);
    for &t in &times {
        sim.advance_to(t)?;
        let h = homogeneous_sobolev_norm(sim.theta(), -1.0)?;
        let g = gradient_lp_integral(&model, config.p, grid, t)?;
        records.push(vec![t, h, h.ln(), sim.theta().l2_norm(), g]);
    }
    let y = records.column("ln_hminus1").expect("column");
    let exp_fit = RateFit::ols("exponential", times.clone(), y.clone())?;
    let pow_fit = RateFit::ols("power", times.iter().map(|t| t.ln_1p()).collect(), y)?;
    let min_residual = exp_fit.residuals().into_iter().fold(f64::INFINITY, f64::min);
    let lambda = -exp_fit.slope;
    let mut out = report(config, RateBoundInputs::default(), records);
    out.summary.insert("lambda".into(), lambda);
    out.summary.insert("fit_residual".into(), exp_fit.residual);
    out.summary.insert("power_residual".into(), pow_fit.residual);
    out.summary.insert("min_residual".into(), min_residual);
    out.summary.insert("velocity_scale".into(), scale);
    out.flags.insert("lower_envelope".into(), min_residual >= -config.envelope_tolerance);
    out.flags.insert("sub_exponential".into(), lambda > 0.0 && pow_fit.residual < exp_fit.residual);
    out.fits.push(exp_fit);
    out.fits.push(pow_fit);
    for &kappa in config.kappa.iter().filter(|k| **k > 0.0) {
        let t_half = half_energy_time(config, grid, kappa, &model, &theta0, times[1])?;
        out.flags.insert(format!("half_energy_reached[kappa={kappa:e}]"), t_half.is_some());
        if let Some(th) = t_half {
            out.summary.insert(format!("t_half[kappa={kappa:e}]"), th);
            if kappa < 1.0 {
                out.summary.insert(format!("t_half_over_log[kappa={kappa:e}]"), th / (1.0 / kappa).ln());
            }
        }
    }
    Ok(out)
}
