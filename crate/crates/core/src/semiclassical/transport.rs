use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::torus::DiscreteMeasure;
use crate::error::{Error, Result};

/// Relative mass mismatch tolerated between the two marginals.
const MASS_TOL: f64 = 1e-9;

/// Euclidean distance on `𝕋 × ℝ` with the periodic metric in `q`.
pub fn torus_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dq = (a.0 - b.0).abs();
    let dq = dq - dq.floor();
    let dq = dq.min(1.0 - dq);
    let dp = a.1 - b.1;
    (dq * dq + dp * dp).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub cost: f64,
    /// `(source, target, mass)` for every basic cell with positive mass.
    pub flows: Vec<(usize, usize, f64)>,
    pub pivots: usize,
}

/// Exact minimum-cost transport between `supply` and `demand` by the
/// transportation simplex with `u`–`v` potentials.
pub fn optimal_transport(
    supply: &[f64],
    demand: &[f64],
    cost: &[Vec<f64>],
) -> Result<TransportPlan> {
    let n = supply.len();
    let m = demand.len();
    if n == 0 || m == 0 {
        return Err(crate::error::argument("empty marginal"));
    }
    if cost.len() != n || cost.iter().any(|row| row.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: n * m,
            found: cost.iter().map(Vec::len).sum(),
        });
    }
    let sa: f64 = supply.iter().sum();
    let sb: f64 = demand.iter().sum();
    if (sa - sb).abs() > MASS_TOL * sa.abs().max(sb.abs()).max(1.0) {
        return Err(Error::Infeasible {
            source_mass: sa,
            target_mass: sb,
        });
    }
    let scale = if sb > 0.0 { sa / sb } else { 1.0 };

    let mut flow = vec![vec![0.0; m]; n];
    let mut basic = vec![vec![false; m]; n];
    let mut s: Vec<f64> = supply.to_vec();
    let mut d: Vec<f64> = demand.iter().map(|x| x * scale).collect();
    let (mut i, mut j) = (0, 0);
    loop {
        let f = s[i].min(d[j]);
        flow[i][j] = f;
        basic[i][j] = true;
        s[i] -= f;
        d[j] -= f;
        if i == n - 1 && j == m - 1 {
            break;
        }
        if i == n - 1 {
            j += 1;
        } else if j == m - 1 || s[i] <= d[j] {
            i += 1;
        } else {
            j += 1;
        }
    }

    let c_max = cost
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |a, &c| a.max(c.abs()));
    let tol = 1e-12 * c_max.max(1e-300);
    let limit = 50 * (n + m) * (n + m) + 1000;
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; m];
    let mut pivots = 0;
    loop {
        potentials(&basic, cost, &mut u, &mut v);
        let mut entering = None;
        let mut best = -tol;
        for (r, row) in cost.iter().enumerate() {
            for (c, &cc) in row.iter().enumerate() {
                if !basic[r][c] {
                    let reduced = cc - u[r] - v[c];
                    if reduced < best {
                        best = reduced;
                        entering = Some((r, c));
                    }
                }
            }
        }
        let Some((er, ec)) = entering else { break };
        if pivots == limit {
            return Err(Error::PivotLimit { iterations: pivots });
        }
        pivots += 1;
        let path = tree_path(&basic, er, ec);
        // path[k] alternates −, +, −, … starting next to the entering cell
        let mut theta = f64::INFINITY;
        let mut leaving = path[0];
        for &(r, c) in path.iter().step_by(2) {
            if flow[r][c] < theta {
                theta = flow[r][c];
                leaving = (r, c);
            }
        }
        for (k, &(r, c)) in path.iter().enumerate() {
            if k % 2 == 0 {
                flow[r][c] -= theta;
            } else {
                flow[r][c] += theta;
            }
        }
        flow[er][ec] = theta;
        basic[er][ec] = true;
        basic[leaving.0][leaving.1] = false;
        flow[leaving.0][leaving.1] = 0.0;
    }

    let mut total = 0.0;
    let mut flows = Vec::new();
    for r in 0..n {
        for c in 0..m {
            if basic[r][c] && flow[r][c] > 0.0 {
                total += flow[r][c] * cost[r][c];
                flows.push((r, c, flow[r][c]));
            }
        }
    }
    Ok(TransportPlan {
        cost: total,
        flows,
        pivots,
    })
}

fn potentials(basic: &[Vec<bool>], cost: &[Vec<f64>], u: &mut [f64], v: &mut [f64]) {
    let n = u.len();
    let m = v.len();
    let mut seen_row = vec![false; n];
    let mut seen_col = vec![false; m];
    let mut queue = VecDeque::new();
    u[0] = 0.0;
    seen_row[0] = true;
    queue.push_back((true, 0));
    while let Some((is_row, k)) = queue.pop_front() {
        if is_row {
            for c in 0..m {
                if basic[k][c] && !seen_col[c] {
                    v[c] = cost[k][c] - u[k];
                    seen_col[c] = true;
                    queue.push_back((false, c));
                }
            }
        } else {
            for r in 0..n {
                if basic[r][k] && !seen_row[r] {
                    u[r] = cost[r][k] - v[k];
                    seen_row[r] = true;
                    queue.push_back((true, r));
                }
            }
        }
    }
}

/// Basic cells on the tree path from column `ec` back to row `er`.
fn tree_path(basic: &[Vec<bool>], er: usize, ec: usize) -> Vec<(usize, usize)> {
    let n = basic.len();
    let m = basic[0].len();
    // nodes: rows 0..n, columns n..n+m
    let mut parent = vec![usize::MAX; n + m];
    let mut queue = VecDeque::new();
    parent[er] = er;
    queue.push_back(er);
    while let Some(node) = queue.pop_front() {
        if node == n + ec {
            break;
        }
        if node < n {
            for c in 0..m {
                if basic[node][c] && parent[n + c] == usize::MAX {
                    parent[n + c] = node;
                    queue.push_back(n + c);
                }
            }
        } else {
            let c = node - n;
            for r in 0..n {
                if basic[r][c] && parent[r] == usize::MAX {
                    parent[r] = node;
                    queue.push_back(r);
                }
            }
        }
    }
    let mut path = Vec::new();
    let mut node = n + ec;
    while node != er {
        let p = parent[node];
        path.push(if node < n {
            (node, p - n)
        } else {
            (p, node - n)
        });
        node = p;
    }
    path
}

fn key(m: &DiscreteMeasure) -> Vec<u64> {
    m.points()
        .iter()
        .zip(m.masses())
        .flat_map(|(&(q, p), &w)| [q.to_bits(), p.to_bits(), w.to_bits()])
        .collect()
}

fn transport_between(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: impl Fn(f64) -> f64,
) -> Result<f64> {
    let (mu, nu) = if key(mu) <= key(nu) {
        (mu, nu)
    } else {
        (nu, mu)
    };
    let c: Vec<Vec<f64>> = mu
        .points()
        .iter()
        .map(|&a| {
            nu.points()
                .iter()
                .map(|&b| cost(torus_distance(a, b)))
                .collect()
        })
        .collect();
    Ok(optimal_transport(mu.masses(), nu.masses(), &c)?.cost)
}

/// Optimal transport cost for `min(1, |z − z′|)`.
pub fn dist1(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    transport_between(mu, nu, |d| d.min(1.0))
}

/// Square root of the optimal transport cost for `|z − z′|²`.
pub fn dist_mk2(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    Ok(transport_between(mu, nu, |d| d * d)?.max(0.0).sqrt())
}

/// `½ Σ_z |μ(z) − ν(z)|` over the union of the supports.
pub fn total_variation(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    let mut diff: Vec<((f64, f64), f64)> = mu
        .points()
        .iter()
        .copied()
        .zip(mu.masses().iter().copied())
        .collect();
    for (&z, &w) in nu.points().iter().zip(nu.masses()) {
        match diff.iter_mut().find(|(y, _)| *y == z) {
            Some(entry) => entry.1 -= w,
            None => diff.push((z, -w)),
        }
    }
    0.5 * diff.iter().map(|(_, w)| w.abs()).sum::<f64>()
}
