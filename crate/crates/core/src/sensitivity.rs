//! Over-squashing sensitivity bounds.
//!
//! For a pair `(i, j)` the non-backtracking bound is the sum over
//! non-backtracking paths `s_0 = i, ..., s_T = j` of
//! `d_{s_0}^{-1/2} d_{s_T}^{-1/2} prod_{t=1}^{T-1} d_{s_t}^{-1}`; the
//! message-passing bound is `(Â^T)_{j,i}`. The path sum is the reference
//! quantity and [`nba_bound_matrix`] is checked against it.

use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{bfs_distances, nb_degree, nb_matrix, normalized_adj, normalized_nb};
use crate::graph::{ArcIndex, Graph, SparseRealMatrix};

/// Bounds on the derivatives of the update, aggregation and readout maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for LipschitzParams {
    fn default() -> Self {
        LipschitzParams {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
        }
    }
}

impl LipschitzParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(LipschitzParams { alpha, beta, gamma })
    }

    /// `(alpha * beta)^T * gamma`.
    pub fn prefactor(&self, t: usize) -> f64 {
        (self.alpha * self.beta).powi(t as i32) * self.gamma
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub pair: (usize, usize),
    pub distance: usize,
    pub nba_bound: f64,
    pub gnn_bound: f64,
    pub path_count_nb: u64,
    pub path_count_simple: u64,
}

fn check_t(t: usize) -> Result<()> {
    if t == 0 {
        Err(Error::InvalidArgument("T must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// All node sequences `i = s_0, ..., s_T = j` along edges with `s_t != s_{t+2}`.
pub fn enumerate_nb_paths(g: &Graph, i: usize, j: usize, t: usize) -> Result<Vec<Vec<usize>>> {
    check_t(t)?;
    g.check_node(i)?;
    g.check_node(j)?;
    let dist_to_j = bfs_distances(g, j);
    let mut out = Vec::new();
    let mut stack = vec![i];
    extend_paths(g, &dist_to_j, j, t, &mut stack, &mut out);
    Ok(out)
}

fn extend_paths(
    g: &Graph,
    dist_to_j: &[Option<usize>],
    j: usize,
    t: usize,
    stack: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    let cur = *stack.last().unwrap();
    let left = t + 1 - stack.len();
    if left == 0 {
        if cur == j {
            out.push(stack.clone());
        }
        return;
    }
    let prev = (stack.len() >= 2).then(|| stack[stack.len() - 2]);
    for &next in g.neighbors(cur) {
        if Some(next) == prev {
            continue;
        }
        // prune branches that cannot reach j in the remaining steps
        if dist_to_j[next].is_none_or(|d| d > left - 1) {
            continue;
        }
        stack.push(next);
        extend_paths(g, dist_to_j, j, t, stack, out);
        stack.pop();
    }
}

fn path_weight(g: &Graph, path: &[usize]) -> f64 {
    let d = |v: usize| g.degree(v) as f64;
    let ends = 1.0 / (d(path[0]) * d(path[path.len() - 1])).sqrt();
    ends * path[1..path.len() - 1].iter().map(|&v| 1.0 / d(v)).product::<f64>()
}

/// Path-sum non-backtracking bound for the pair `(i, j)`.
pub fn nba_bound_pathsum(g: &Graph, i: usize, j: usize, t: usize) -> Result<f64> {
    Ok(enumerate_nb_paths(g, i, j, t)?
        .iter()
        .map(|p| path_weight(g, p))
        .sum())
}

/// Arc-level data for propagating bound columns.
struct ArcBound {
    ai: ArcIndex,
    b_hat: SparseRealMatrix,
    /// Weight `(d_tail d_head)^{-1/2}` of each arc at the source end.
    tail_weight: Vec<f64>,
}

impl ArcBound {
    fn new(g: &Graph) -> Result<Self> {
        let ai = ArcIndex::build(g)?;
        let b = nb_matrix(g, &ai, false);
        let b_hat = normalized_nb(&b, &nb_degree(&b));
        let tail_weight = ai
            .arcs()
            .iter()
            .map(|&(s, h)| 1.0 / ((g.degree(s) * g.degree(h)) as f64).sqrt())
            .collect();
        Ok(ArcBound {
            ai,
            b_hat,
            tail_weight,
        })
    }

    /// Column `i` of `S^T B̂^{T-1} H`, where `H` maps each arc to its head with
    /// weight 1 and `S` maps it to its tail with weight `tail_weight`.
    fn column(&self, i: usize, t: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.ai.len()];
        for &a in self.ai.incoming(i) {
            x[a] = 1.0;
        }
        for _ in 1..t {
            x = self.b_hat.matvec(&x);
        }
        (0..self.ai.num_nodes())
            .map(|j| {
                self.ai
                    .outgoing(j)
                    .iter()
                    .map(|&a| self.tail_weight[a] * x[a])
                    .sum()
            })
            .collect()
    }

    /// Number of non-backtracking walks of length `t` from `i` to every node.
    fn walk_counts(&self, i: usize, t: usize) -> Vec<u64> {
        let ai = &self.ai;
        let mut cnt = vec![0u64; ai.len()];
        for &a in ai.outgoing(i) {
            cnt[a] = 1;
        }
        for _ in 1..t {
            let mut next = vec![0u64; ai.len()];
            for (a, &c) in cnt.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for &b in ai.outgoing(ai.head(a)) {
                    if b != ai.reverse_of(a) {
                        next[b] = next[b].saturating_add(c);
                    }
                }
            }
            cnt = next;
        }
        (0..ai.num_nodes())
            .map(|j| {
                ai.incoming(j)
                    .iter()
                    .fold(0u64, |s, &a| s.saturating_add(cnt[a]))
            })
            .collect()
    }
}

/// Dense `n x n` non-backtracking bound matrix; entry `[j, i]` is the bound
/// for the pair `(i, j)`.
///
/// Computed as `S^T B̂^{T-1} H` with a split incidence: `H` sends an arc to its
/// head with weight 1 and `S` sends it to its tail with weight
/// `(d_tail d_head)^{-1/2}`. At pairs at distance exactly `T` this equals the
/// path sum.
pub fn nba_bound_matrix(g: &Graph, t: usize) -> Result<Array2<f64>> {
    check_t(t)?;
    let n = g.n();
    let mut out = Array2::zeros((n, n));
    if g.m() == 0 {
        return Ok(out);
    }
    let ab = ArcBound::new(g)?;
    let cols: Vec<Vec<f64>> = (0..n).into_par_iter().map(|i| ab.column(i, t)).collect();
    for (i, col) in cols.into_iter().enumerate() {
        out.column_mut(i).assign(&ndarray::Array1::from(col));
    }
    Ok(out)
}

fn adj_power_column(a_hat: &SparseRealMatrix, i: usize, t: usize) -> Vec<f64> {
    let mut x = vec![0.0; a_hat.nrows()];
    x[i] = 1.0;
    for _ in 0..t {
        x = a_hat.matvec(&x);
    }
    x
}

/// `(Â^T)_{j,i}`.
pub fn gnn_bound(g: &Graph, i: usize, j: usize, t: usize) -> Result<f64> {
    check_t(t)?;
    g.check_node(i)?;
    g.check_node(j)?;
    Ok(adj_power_column(&normalized_adj(g), i, t)[j])
}

/// Number of shortest paths from `source` to every node.
fn geodesic_counts(g: &Graph, source: usize, dist: &[Option<usize>]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..g.n()).filter(|&v| dist[v].is_some()).collect();
    order.sort_by_key(|&v| dist[v]);
    let mut sigma = vec![0u64; g.n()];
    sigma[source] = 1;
    for &v in order.iter().skip(1) {
        let dv = dist[v].unwrap();
        sigma[v] = g
            .neighbors(v)
            .iter()
            .filter(|&&u| dist[u] == Some(dv - 1))
            .fold(0u64, |s, &u| s.saturating_add(sigma[u]));
    }
    sigma
}

/// Reports for every unordered pair at distance exactly `T`, sorted by pair.
///
/// Fails with `BoundViolation` if any pair has a smaller non-backtracking
/// bound than message-passing bound.
pub fn compare_bounds(g: &Graph, t: usize) -> Result<Vec<BoundReport>> {
    compare_bounds_with(g, t, &LipschitzParams::default())
}

/// [`compare_bounds`] with both bounds multiplied by the Lipschitz prefactor.
pub fn compare_bounds_with(g: &Graph, t: usize, params: &LipschitzParams) -> Result<Vec<BoundReport>> {
    check_t(t)?;
    if g.m() == 0 {
        return Err(Error::NoPairsAtDistance(t));
    }
    let ab = ArcBound::new(g)?;
    let a_hat = normalized_adj(g);
    let scale = params.prefactor(t);
    let per_source: Vec<Vec<BoundReport>> = (0..g.n())
        .into_par_iter()
        .map(|i| {
            let dist = bfs_distances(g, i);
            let targets: Vec<usize> = ((i + 1)..g.n()).filter(|&j| dist[j] == Some(t)).collect();
            if targets.is_empty() {
                return Vec::new();
            }
            let nba = ab.column(i, t);
            let gnn = adj_power_column(&a_hat, i, t);
            let nb_counts = ab.walk_counts(i, t);
            let simple = geodesic_counts(g, i, &dist);
            targets
                .into_iter()
                .map(|j| BoundReport {
                    pair: (i, j),
                    distance: t,
                    nba_bound: scale * nba[j],
                    gnn_bound: scale * gnn[j],
                    path_count_nb: nb_counts[j],
                    path_count_simple: simple[j],
                })
                .collect()
        })
        .collect();
    let reports: Vec<BoundReport> = per_source.into_iter().flatten().collect();
    if reports.is_empty() {
        return Err(Error::NoPairsAtDistance(t));
    }
    for r in &reports {
        if r.nba_bound < r.gnn_bound * (1.0 - 1e-12) {
            return Err(Error::BoundViolation {
                i: r.pair.0,
                j: r.pair.1,
                nba: r.nba_bound,
                gnn: r.gnn_bound,
            });
        }
    }
    Ok(reports)
}

/// Checks, path by path, that the self-loop normalized weight never exceeds
/// the non-backtracking weight.
pub fn perpath_inequality_check(g: &Graph, i: usize, j: usize, t: usize) -> Result<bool> {
    let d = |v: usize| g.degree(v) as f64;
    Ok(enumerate_nb_paths(g, i, j, t)?.iter().all(|p| {
        let last = p.len() - 1;
        let inner = &p[1..last];
        let gnn = ((d(p[0]) + 1.0) * (d(p[last]) + 1.0)).sqrt().recip()
            * inner.iter().map(|&v| 1.0 / (d(v) + 1.0)).product::<f64>();
        gnn <= path_weight(g, p)
    }))
}
