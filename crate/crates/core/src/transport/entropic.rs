use serde::{Deserialize, Serialize};

use super::{check_balance, check_delta, cost_matrix, dual_value, DiscreteMeasure, OtMethod, OtResult, TransportPlan};
use crate::error::{Error, Result};

/// Stopping rule for the scaling iterations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropicOptions {
    pub max_iterations: usize,
    /// Target marginal violation, relative to the total mass.
    pub tolerance: f64,
    /// Anneal ε geometrically from the largest cost down to the target.
    pub annealing: bool,
}

impl Default for EntropicOptions {
    fn default() -> Self {
        Self { max_iterations: 200_000, tolerance: 1e-9, annealing: true }
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let top = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + values.map(|v| (v - top).exp()).sum::<f64>().ln()
}

struct Sinkhorn<'a> {
    m: usize,
    n: usize,
    cost: &'a [f64],
    log_a: Vec<f64>,
    log_b: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
}

impl Sinkhorn<'_> {
    fn sweep(&mut self, eps: f64) {
        let (m, n) = (self.m, self.n);
        for i in 0..m {
            let (g, row) = (&self.g, &self.cost[i * n..(i + 1) * n]);
            let lse = log_sum_exp((0..n).map(|j| (g[j] - row[j]) / eps));
            self.f[i] = if self.log_a[i] == f64::NEG_INFINITY { f64::NEG_INFINITY } else { eps * (self.log_a[i] - lse) };
        }
        for j in 0..n {
            let f = &self.f;
            let lse = log_sum_exp((0..m).map(|i| (f[i] - self.cost[i * n + j]) / eps));
            self.g[j] = if self.log_b[j] == f64::NEG_INFINITY { f64::NEG_INFINITY } else { eps * (self.log_b[j] - lse) };
        }
    }

    fn entry(&self, i: usize, j: usize, eps: f64) -> f64 {
        ((self.f[i] + self.g[j] - self.cost[i * self.n + j]) / eps).exp()
    }

    /// Row-marginal error; columns are exact right after a sweep.
    fn violation(&self, a: &[f64], eps: f64) -> f64 {
        (0..self.m)
            .map(|i| ((0..self.n).map(|j| self.entry(i, j, eps)).sum::<f64>() - a[i]).abs())
            .sum()
    }
}

/// Entropically regularised transport `min ⟨C, π⟩ + ε KL(π | μ⊗ν)` solved by
/// log-domain Sinkhorn iterations. The reported cost is `⟨C, π_ε⟩`.
pub fn entropic_ot(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    delta: f64,
    epsilon: f64,
    opts: EntropicOptions,
) -> Result<OtResult> {
    check_delta(delta)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!("ε must be positive (got {epsilon})")));
    }
    check_balance(mu, nu)?;
    let total = mu.total();
    let mut nu = nu.clone();
    nu.scale_masses(total / nu.total());
    let (m, n) = (mu.len(), nu.len());
    let cost = cost_matrix(mu, &nu, delta);
    let mut solver = Sinkhorn {
        m,
        n,
        cost: &cost,
        log_a: mu.masses().iter().map(|v| v.ln()).collect(),
        log_b: nu.masses().iter().map(|v| v.ln()).collect(),
        f: vec![0.0; m],
        g: vec![0.0; n],
    };
    let target = opts.tolerance * total;
    let mut stages = Vec::new();
    if opts.annealing {
        let mut e = cost.iter().copied().fold(0.0, f64::max);
        while e > epsilon {
            stages.push(e);
            e *= 0.5;
        }
    }
    stages.push(epsilon);
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    for (s, &eps) in stages.iter().enumerate() {
        let last = s + 1 == stages.len();
        let tol = if last { target } else { 1e-3 * total };
        loop {
            solver.sweep(eps);
            iterations += 1;
            if iterations % 5 == 0 || iterations >= opts.max_iterations {
                residual = solver.violation(mu.masses(), eps);
                if residual <= tol {
                    break;
                }
                if iterations >= opts.max_iterations {
                    return Err(Error::Convergence { iterations, residual: residual / total });
                }
            }
        }
    }
    let mut entries = Vec::with_capacity(m * n);
    let mut primal = 0.0;
    for i in 0..m {
        for j in 0..n {
            let p = solver.entry(i, j, epsilon);
            if p > 0.0 {
                entries.push((i, j, p));
                primal += p * cost[i * n + j];
            }
        }
    }
    let plan = TransportPlan { rows: m, cols: n, entries };
    let finite = |v: f64| if v.is_finite() { v } else { 0.0 };
    let phi: Vec<f64> = solver.f.iter().map(|&v| finite(v)).collect();
    let psi: Vec<f64> = solver.g.iter().map(|&v| finite(-v)).collect();
    let dual = dual_value(mu, &nu, &phi, &psi);
    let marginal_violation = plan.marginal_violation(mu, &nu);
    debug_assert!(residual.is_finite());
    Ok(OtResult {
        method: OtMethod::Entropic,
        cost: primal,
        plan,
        source_potential: phi,
        target_potential: psi,
        dual_value: dual,
        gap: (primal - dual).abs(),
        lipschitz_violation: 0.0,
        marginal_violation,
        iterations,
    })
}
