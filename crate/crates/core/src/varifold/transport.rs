//! Exact optimal transport between small discrete measures, solved as a
//! min-cost flow by successive shortest paths with Dijkstra and node
//! potentials.

use ndarray::Array2;

use super::{DiscreteVarifold, SupportMeasure};
use crate::{Error, Result};

/// Largest combined support accepted by [`w1_small`].
pub const W1_MAX_ATOMS: usize = 256;

const MASS_TOL: f64 = 1e-9;
const FLOW_EPS: f64 = 1e-15;

/// An optimal plan with the dual potentials certifying it: for every pair,
/// `sink_potential[j] - source_potential[i] <= cost[i][j]` (up to rounding)
/// with equality wherever `plan[i][j] > 0`.
#[derive(Debug, Clone)]
pub struct TransportSolution {
    pub cost: f64,
    pub plan: Array2<f64>,
    pub source_potential: Vec<f64>,
    pub sink_potential: Vec<f64>,
}

/// Solves `min Σ πᵢⱼ cᵢⱼ` over plans with row sums `supply` and column sums
/// `demand`. The two totals should agree; any excess is left unshipped.
pub fn optimal_transport(supply: &[f64], demand: &[f64], cost: &Array2<f64>) -> Result<TransportSolution> {
    let (m, k) = (supply.len(), demand.len());
    if cost.shape() != [m, k] {
        return Err(Error::ShapeMismatch(format!(
            "cost matrix is {:?}, expected [{m}, {k}]",
            cost.shape()
        )));
    }
    if supply.iter().chain(demand).chain(cost.iter()).any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidVarifold("transport inputs must be finite and non-negative".into()));
    }
    // Nodes: 0 = super source, 1..=m sources, m+1..=m+k sinks, m+k+1 = super sink.
    let nodes = m + k + 2;
    let (src, snk) = (0, m + k + 1);
    let mut plan = Array2::<f64>::zeros((m, k));
    let mut sent = vec![0.0; m];
    let mut recv = vec![0.0; k];
    let mut phi = vec![0.0; nodes];

    // Residual arcs out of `u` as (target, cost, capacity).
    let arcs = |u: usize, plan: &Array2<f64>, sent: &[f64], recv: &[f64], out: &mut Vec<(usize, f64, f64)>| {
        out.clear();
        if u == src {
            for i in 0..m {
                out.push((1 + i, 0.0, supply[i] - sent[i]));
            }
        } else if u <= m {
            let i = u - 1;
            out.push((src, 0.0, sent[i]));
            for j in 0..k {
                out.push((1 + m + j, cost[[i, j]], f64::INFINITY));
            }
        } else if u < snk {
            let j = u - 1 - m;
            for i in 0..m {
                out.push((1 + i, -cost[[i, j]], plan[[i, j]]));
            }
            out.push((snk, 0.0, demand[j] - recv[j]));
        } else {
            for j in 0..k {
                out.push((1 + m + j, 0.0, recv[j]));
            }
        }
    };

    let mut buf = Vec::with_capacity(m.max(k) + 1);
    let max_rounds = 4 * (m + k + 1) * (m + k + 1);
    for _ in 0..max_rounds {
        let mut dist = vec![f64::INFINITY; nodes];
        let mut prev = vec![usize::MAX; nodes];
        let mut done = vec![false; nodes];
        dist[src] = 0.0;
        loop {
            let mut u = usize::MAX;
            for v in 0..nodes {
                if !done[v] && dist[v].is_finite() && (u == usize::MAX || dist[v] < dist[u]) {
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            arcs(u, &plan, &sent, &recv, &mut buf);
            for &(v, c, cap) in &buf {
                if cap <= FLOW_EPS || done[v] {
                    continue;
                }
                let reduced = (c + phi[u] - phi[v]).max(0.0);
                if dist[u] + reduced < dist[v] {
                    dist[v] = dist[u] + reduced;
                    prev[v] = u;
                }
            }
        }
        if !dist[snk].is_finite() {
            break;
        }
        for v in 0..nodes {
            phi[v] += dist[v].min(dist[snk]);
        }
        // Bottleneck along the path, then push.
        let mut path = vec![snk];
        while *path.last().unwrap() != src {
            path.push(prev[*path.last().unwrap()]);
        }
        path.reverse();
        let capacity = |u: usize, v: usize, plan: &Array2<f64>, sent: &[f64], recv: &[f64]| -> f64 {
            if u == src {
                supply[v - 1] - sent[v - 1]
            } else if v == src {
                sent[u - 1]
            } else if v == snk {
                demand[u - 1 - m] - recv[u - 1 - m]
            } else if u == snk {
                recv[v - 1 - m]
            } else if u <= m {
                f64::INFINITY
            } else {
                plan[[v - 1, u - 1 - m]]
            }
        };
        let delta = path
            .windows(2)
            .map(|w| capacity(w[0], w[1], &plan, &sent, &recv))
            .fold(f64::INFINITY, f64::min);
        for w in path.windows(2) {
            let (u, v) = (w[0], w[1]);
            if u == src {
                sent[v - 1] += delta;
            } else if v == src {
                sent[u - 1] -= delta;
            } else if v == snk {
                recv[u - 1 - m] += delta;
            } else if u == snk {
                recv[v - 1 - m] -= delta;
            } else if u <= m {
                plan[[u - 1, v - 1 - m]] += delta;
            } else {
                let f = &mut plan[[v - 1, u - 1 - m]];
                *f = (*f - delta).max(0.0);
            }
        }
    }
    let total = plan.iter().zip(cost.iter()).map(|(f, c)| f * c).sum();
    Ok(TransportSolution {
        cost: total,
        plan,
        source_potential: phi[1..=m].to_vec(),
        sink_potential: phi[m + 1..=m + k].to_vec(),
    })
}

/// 1-Wasserstein distance between two probability varifolds with the
/// Euclidean ground cost on concatenated `(x, v)` coordinates.
pub fn w1_small(mu: &DiscreteVarifold, nu: &DiscreteVarifold) -> Result<f64> {
    if mu.dim() != nu.dim() {
        return Err(Error::InvalidVarifold(format!(
            "dimensions {} and {} differ",
            mu.dim(),
            nu.dim()
        )));
    }
    let atoms = mu.len() + nu.len();
    if atoms > W1_MAX_ATOMS {
        return Err(Error::TooLarge(atoms));
    }
    let (ma, mb) = (mu.total_mass(), nu.total_mass());
    if (ma - 1.0).abs() > MASS_TOL || (mb - 1.0).abs() > MASS_TOL {
        return Err(Error::MassMismatch(ma, mb));
    }
    let (fa, fb) = (mu.feature_matrix(), nu.feature_matrix());
    let cost = Array2::from_shape_fn((mu.len(), nu.len()), |(i, j)| {
        fa.row(i)
            .iter()
            .zip(fb.row(j))
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    });
    Ok(optimal_transport(mu.weights(), nu.weights(), &cost)?.cost)
}
