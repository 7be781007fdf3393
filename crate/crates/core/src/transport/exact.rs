use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{
    check_balance, check_delta, cost_matrix, d_delta, dual_value, DiscreteMeasure, OtMethod, OtResult, TransportPlan,
};
use crate::error::{Error, Result};

/// Largest combined support the exact solver accepts.
pub const EXACT_MAX_SUPPORT: usize = 4096;

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance.
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Successive shortest paths on the complete bipartite network with
/// Johnson potentials; Dijkstra stops as soon as the super sink is settled.
struct Network<'a> {
    m: usize,
    n: usize,
    cost: &'a [f64],
    flow: Vec<f64>,
    /// Sources currently shipping to each sink (the residual reverse arcs).
    senders: Vec<Vec<usize>>,
    supply: Vec<f64>,
    demand: Vec<f64>,
    pot: Vec<f64>,
    tol: f64,
}

impl Network<'_> {
    fn source_node(&self) -> usize {
        self.m + self.n
    }

    fn sink_node(&self) -> usize {
        self.m + self.n + 1
    }

    /// Shortest path from the super source; returns the predecessor array.
    fn dijkstra(&mut self) -> Option<Vec<usize>> {
        let (m, n) = (self.m, self.n);
        let (s, t) = (self.source_node(), self.sink_node());
        let v_count = m + n + 2;
        let mut dist = vec![f64::INFINITY; v_count];
        let mut pred = vec![usize::MAX; v_count];
        let mut done = vec![false; v_count];
        let mut heap = BinaryHeap::new();
        dist[s] = 0.0;
        heap.push(Entry(0.0, s));
        let pot = &self.pot;
        while let Some(Entry(d, u)) = heap.pop() {
            if done[u] || d > dist[u] {
                continue;
            }
            done[u] = true;
            if u == t {
                break;
            }
            let mut relax = |v: usize, rc: f64, dist: &mut [f64], heap: &mut BinaryHeap<Entry>| {
                let nd = d + rc.max(0.0);
                if nd < dist[v] {
                    dist[v] = nd;
                    pred[v] = u;
                    heap.push(Entry(nd, v));
                }
            };
            if u == s {
                for i in (0..m).filter(|&i| self.supply[i] > self.tol) {
                    relax(i, pot[s] - pot[i], &mut dist, &mut heap);
                }
            } else if u < m {
                let row = &self.cost[u * n..(u + 1) * n];
                let pu = pot[u];
                for (j, c) in row.iter().enumerate() {
                    let v = m + j;
                    if !done[v] {
                        relax(v, c + pu - pot[v], &mut dist, &mut heap);
                    }
                }
            } else {
                let j = u - m;
                for &i in &self.senders[j] {
                    if !done[i] {
                        relax(i, pot[u] - pot[i] - self.cost[i * n + j], &mut dist, &mut heap);
                    }
                }
                if self.demand[j] > self.tol {
                    relax(t, pot[u] - pot[t], &mut dist, &mut heap);
                }
            }
        }
        if !done[t] {
            return None;
        }
        let cap = dist[t];
        for (p, d) in self.pot.iter_mut().zip(&dist) {
            *p += d.min(cap);
        }
        Some(pred)
    }

    fn augment(&mut self, pred: &[usize]) {
        let (m, n) = (self.m, self.n);
        let (s, t) = (self.source_node(), self.sink_node());
        let mut path = vec![t];
        let mut v = t;
        while v != s {
            v = pred[v];
            path.push(v);
        }
        path.reverse();
        // path = s, i0, j0, i1, j1, ..., jk, t
        let first = path[1];
        let last = path[path.len() - 2] - m;
        let mut b = self.supply[first].min(self.demand[last]);
        for w in path[1..path.len() - 1].windows(2) {
            if w[0] >= m {
                // Reverse arc sink j -> source i cancels flow on (i, j).
                b = b.min(self.flow[w[1] * n + (w[0] - m)]);
            }
        }
        for w in path[1..path.len() - 1].windows(2) {
            if w[0] < m {
                let (i, j) = (w[0], w[1] - m);
                if self.flow[i * n + j] == 0.0 {
                    self.senders[j].push(i);
                }
                self.flow[i * n + j] += b;
            } else {
                let (j, i) = (w[0] - m, w[1]);
                let f = &mut self.flow[i * n + j];
                *f -= b;
                if *f <= self.tol {
                    *f = 0.0;
                    self.senders[j].retain(|&k| k != i);
                }
            }
        }
        self.supply[first] -= b;
        self.demand[last] -= b;
    }
}

/// Exact `D_δ(μ, ν) = min_π Σ d_δ(x_i, y_j) π_ij` by min-cost flow.
///
/// The target masses are rescaled by `μ(𝕋)/ν(𝕋)` (a relative change of at most
/// `1e-9`, larger imbalances are rejected). The returned potential is the
/// c-transform `φ(z) = min_j (v_j + d_δ(z, y_j))` of the flow duals over the
/// combined support, which is `d_δ`-Lipschitz by construction.
pub fn exact_ot(mu: &DiscreteMeasure, nu: &DiscreteMeasure, delta: f64) -> Result<OtResult> {
    check_delta(delta)?;
    check_balance(mu, nu)?;
    let (m, n) = (mu.len(), nu.len());
    if m + n > EXACT_MAX_SUPPORT {
        return Err(Error::ResourceLimit(format!(
            "exact transport supports at most {EXACT_MAX_SUPPORT} points in total, got {}",
            m + n
        )));
    }
    let total = mu.total();
    let mut nu = nu.clone();
    nu.scale_masses(total / nu.total());
    let cost = cost_matrix(mu, &nu, delta);
    let mut net = Network {
        m,
        n,
        cost: &cost,
        flow: vec![0.0; m * n],
        senders: vec![Vec::new(); n],
        supply: mu.masses().to_vec(),
        demand: nu.masses().to_vec(),
        pot: vec![0.0; m + n + 2],
        tol: 1e-15 * total,
    };
    let mut iterations = 0;
    while net.supply.iter().any(|&s| s > net.tol) && net.demand.iter().any(|&d| d > net.tol) {
        let pred = net.dijkstra().ok_or(Error::Convergence {
            iterations,
            residual: net.supply.iter().sum(),
        })?;
        net.augment(&pred);
        iterations += 1;
    }

    let mut entries = Vec::new();
    let mut primal = 0.0;
    for (j, senders) in net.senders.iter().enumerate() {
        for &i in senders {
            let f = net.flow[i * n + j];
            entries.push((i, j, f));
            primal += f * cost[i * n + j];
        }
    }
    entries.sort_by_key(|&(i, j, _)| (i, j));
    let plan = TransportPlan { rows: m, cols: n, entries };

    let v: Vec<f64> = (0..n).map(|j| -net.pot[m + j]).collect();
    let phi_x: Vec<f64> = (0..m)
        .map(|i| (0..n).map(|j| v[j] + cost[i * n + j]).fold(f64::INFINITY, f64::min))
        .collect();
    let phi_y: Vec<f64> = (0..n)
        .map(|k| (0..n).map(|j| v[j] + d_delta(nu.points()[k], nu.points()[j], delta)).fold(f64::INFINITY, f64::min))
        .collect();
    let dual = dual_value(mu, &nu, &phi_x, &phi_y);

    let support: Vec<([f64; 2], f64)> = mu
        .points()
        .iter()
        .copied()
        .zip(phi_x.iter().copied())
        .chain(nu.points().iter().copied().zip(phi_y.iter().copied()))
        .collect();
    let mut lipschitz_violation: f64 = 0.0;
    for (a, &(p, fp)) in support.iter().enumerate() {
        for &(q, fq) in &support[a + 1..] {
            lipschitz_violation = lipschitz_violation.max((fp - fq).abs() - d_delta(p, q, delta));
        }
    }
    let marginal_violation = plan.marginal_violation(mu, &nu);
    Ok(OtResult {
        method: OtMethod::Exact,
        cost: primal,
        plan,
        source_potential: phi_x,
        target_potential: phi_y,
        dual_value: dual,
        gap: (primal - dual).abs(),
        lipschitz_violation: lipschitz_violation.max(0.0),
        marginal_violation,
        iterations,
    })
}
