//! Random walks on graphs and access times on trees.
//!
//! Three kernels are simulated:
//!
//! * SRW: uniform over the neighbors of the current node.
//! * NBRW: uniform over the neighbors except the node just left; stuck
//!   (dead end) at a leaf it entered.
//! * BBRW: like NBRW, but steps back when the previous node is the only
//!   neighbor.
//!
//! The first step of NBRW and BBRW has no previous node and is uniform over
//! all neighbors. On trees the expected hitting times have closed forms in
//! terms of subtree sizes along the unique path, implemented by
//! [`tree_access_time_srw`] and [`tree_access_time_bbrw`].

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::stream_rng;

/// Default step cap for a single walk.
pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkKind {
    Srw,
    Nbrw,
    Bbrw,
}

impl WalkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WalkKind::Srw => "srw",
            WalkKind::Nbrw => "nbrw",
            WalkKind::Bbrw => "bbrw",
        }
    }
}

impl fmt::Display for WalkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WalkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "srw" => Ok(WalkKind::Srw),
            "nbrw" => Ok(WalkKind::Nbrw),
            "bbrw" => Ok(WalkKind::Bbrw),
            other => Err(Error::InvalidArgument(format!("unknown walk kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkOutcome {
    /// Target reached after this many steps.
    Hit(u64),
    /// No admissible move: an NBRW that entered a leaf, or an isolated start.
    DeadEnd { steps: u64 },
    /// Step cap reached first.
    Truncated,
}

/// Flattened neighbor lists for the simulation hot loop.
struct WalkGraph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl WalkGraph {
    fn new(g: &Graph) -> Self {
        let mut offsets = Vec::with_capacity(g.n() + 1);
        let mut targets = Vec::with_capacity(2 * g.m());
        offsets.push(0);
        for v in 0..g.n() {
            targets.extend(g.neighbors(v).iter().map(|&u| u as u32));
            offsets.push(targets.len());
        }
        WalkGraph { offsets, targets }
    }

    #[inline]
    fn neighbors(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    fn run<R: Rng + ?Sized>(
        &self,
        kind: WalkKind,
        start: u32,
        target: u32,
        max_steps: u64,
        rng: &mut R,
    ) -> WalkOutcome {
        if start == target {
            return WalkOutcome::Hit(0);
        }
        let mut prev = u32::MAX;
        let mut cur = start;
        let mut steps = 0u64;
        while steps < max_steps {
            let nbrs = self.neighbors(cur);
            let d = nbrs.len() as u32;
            let next = if d == 0 {
                return WalkOutcome::DeadEnd { steps };
            } else if kind == WalkKind::Srw || prev == u32::MAX {
                nbrs[rng.random_range(0..d) as usize]
            } else if d == 1 {
                // the only neighbor is the node we came from
                match kind {
                    WalkKind::Nbrw => return WalkOutcome::DeadEnd { steps },
                    _ => prev,
                }
            } else {
                // uniform over N(cur) \ {prev}: redirect a draw of prev to the last slot
                let pick = nbrs[rng.random_range(0..d - 1) as usize];
                if pick == prev {
                    nbrs[(d - 1) as usize]
                } else {
                    pick
                }
            };
            steps += 1;
            if next == target {
                return WalkOutcome::Hit(steps);
            }
            prev = cur;
            cur = next;
        }
        WalkOutcome::Truncated
    }
}

/// Simulates one walk from `start` until it first visits `target`.
pub fn simulate_walk(
    g: &Graph,
    kind: WalkKind,
    start: usize,
    target: usize,
    max_steps: u64,
    seed: u64,
) -> Result<WalkOutcome> {
    check_walk_args(g, start, target, max_steps)?;
    let mut rng = stream_rng(seed, 0);
    Ok(WalkGraph::new(g).run(kind, start as u32, target as u32, max_steps, &mut rng))
}

fn check_walk_args(g: &Graph, start: usize, target: usize, max_steps: u64) -> Result<()> {
    g.check_node(start)?;
    g.check_node(target)?;
    if max_steps == 0 {
        return Err(Error::InvalidArgument("max_steps must be at least 1".into()));
    }
    if g.n() > u32::MAX as usize {
        return Err(Error::InvalidArgument("graph too large for the walk simulator".into()));
    }
    Ok(())
}

/// Monte Carlo estimate of an access time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccessTimeEstimate {
    /// Mean hitting time over walks that reached the target.
    pub mean: f64,
    /// Sample standard deviation over `hits` walks, divided by `sqrt(hits)`.
    pub stderr: f64,
    /// Walks launched.
    pub samples: u64,
    pub hits: u64,
    pub truncated: u64,
    pub dead_ends: u64,
}

impl AccessTimeEstimate {
    /// True when more than 0.1% of the walks hit the step cap, in which case
    /// the conditional mean can be noticeably biased low.
    pub fn truncation_significant(&self) -> bool {
        self.truncated * 1000 > self.samples
    }
}

#[derive(Default, Clone, Copy)]
struct Tally {
    hits: u64,
    sum: u128,
    sum_sq: u128,
    truncated: u64,
    dead_ends: u64,
}

impl Tally {
    fn add(mut self, outcome: WalkOutcome) -> Self {
        match outcome {
            WalkOutcome::Hit(t) => {
                self.hits += 1;
                self.sum += t as u128;
                self.sum_sq += (t as u128) * (t as u128);
            }
            WalkOutcome::DeadEnd { .. } => self.dead_ends += 1,
            WalkOutcome::Truncated => self.truncated += 1,
        }
        self
    }

    fn merge(self, o: Tally) -> Self {
        Tally {
            hits: self.hits + o.hits,
            sum: self.sum + o.sum,
            sum_sq: self.sum_sq + o.sum_sq,
            truncated: self.truncated + o.truncated,
            dead_ends: self.dead_ends + o.dead_ends,
        }
    }
}

/// Estimates the access time from `i` to `j` with `samples` independent walks.
///
/// Walk `k` draws from random stream `k` of `seed`. Tallies are exact
/// integers, so the estimate does not depend on how samples are spread over
/// threads.
pub fn mc_access_time(
    g: &Graph,
    kind: WalkKind,
    i: usize,
    j: usize,
    samples: u64,
    max_steps: u64,
    seed: u64,
) -> Result<AccessTimeEstimate> {
    check_walk_args(g, i, j, max_steps)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let wg = WalkGraph::new(g);
    const CHUNK: u64 = 4096;
    let chunks = samples.div_ceil(CHUNK);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(samples);
            (lo..hi).fold(Tally::default(), |t, k| {
                let mut rng = stream_rng(seed, k);
                t.add(wg.run(kind, i as u32, j as u32, max_steps, &mut rng))
            })
        })
        .reduce(Tally::default, Tally::merge);

    if tally.hits == 0 {
        return Err(Error::AllTruncated { max_steps });
    }
    let h = tally.hits as f64;
    let mean = tally.sum as f64 / h;
    let var = if tally.hits > 1 {
        // exact integer numerator: n * sum_sq - sum^2
        let num = tally.hits as u128 * tally.sum_sq - tally.sum * tally.sum;
        num as f64 / (h * (h - 1.0))
    } else {
        0.0
    };
    Ok(AccessTimeEstimate {
        mean,
        stderr: (var / h).sqrt(),
        samples,
        hits: tally.hits,
        truncated: tally.truncated,
        dead_ends: tally.dead_ends,
    })
}

/// Unique tree path `v_0 = i, ..., v_N = j` with, for each `l < N`, the number
/// of edges in the component of `v_l` once edge `(v_l, v_{l+1})` is removed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreePath {
    pub nodes: Vec<usize>,
    pub subtree_edge_counts: Vec<usize>,
}

impl TreePath {
    pub fn distance(&self) -> usize {
        self.nodes.len() - 1
    }
}

fn require_tree(g: &Graph) -> Result<()> {
    if g.is_tree() {
        Ok(())
    } else {
        Err(Error::NotATree)
    }
}

pub fn tree_path(g: &Graph, i: usize, j: usize) -> Result<TreePath> {
    require_tree(g)?;
    g.check_node(i)?;
    g.check_node(j)?;
    // Root the tree at j: the component of v_l after cutting the edge to its
    // parent v_{l+1} is exactly the subtree below v_l.
    let n = g.n();
    let mut parent = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    parent[j] = j;
    order.push(j);
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for &v in g.neighbors(u) {
            if parent[v] == usize::MAX {
                parent[v] = u;
                order.push(v);
            }
        }
    }
    let mut size = vec![1usize; n];
    for &u in order.iter().skip(1).rev() {
        size[parent[u]] += size[u];
    }
    let mut nodes = vec![i];
    let mut subtree_edge_counts = Vec::new();
    let mut cur = i;
    while cur != j {
        subtree_edge_counts.push(size[cur] - 1);
        cur = parent[cur];
        nodes.push(cur);
    }
    Ok(TreePath {
        nodes,
        subtree_edge_counts,
    })
}

/// Exact SRW access time on a tree: `sum_l (1 + 2 |E(G_l)|)`.
pub fn tree_access_time_srw(g: &Graph, i: usize, j: usize) -> Result<f64> {
    let path = tree_path(g, i, j)?;
    Ok(path
        .subtree_edge_counts
        .iter()
        .map(|&e| 1.0 + 2.0 * e as f64)
        .sum())
}

/// Exact BBRW access time on a tree.
///
/// Per-hop terms `1 + 2|E(G_n)| (d_n - 1)/d_n`, minus for every interior path
/// node `v_l` the correction `(2|E(G_{l-1})| + 2) / d_{v_l}` that accounts for
/// arriving there with a known previous node.
pub fn tree_access_time_bbrw(g: &Graph, i: usize, j: usize) -> Result<f64> {
    let path = tree_path(g, i, j)?;
    let d = |l: usize| g.degree(path.nodes[l]) as f64;
    let e = |l: usize| path.subtree_edge_counts[l] as f64;
    let n = path.distance();
    let hops: f64 = (0..n).map(|l| 1.0 + 2.0 * e(l) * (d(l) - 1.0) / d(l)).sum();
    let arrivals: f64 = (1..n).map(|l| (2.0 * e(l - 1) + 2.0) / d(l)).sum();
    Ok(hops - arrivals)
}

/// Exact BBRW return time on a tree: `2|E| / d_i`.
pub fn tree_return_time_bbrw(g: &Graph, i: usize) -> Result<f64> {
    require_tree(g)?;
    g.check_node(i)?;
    match g.degree(i) {
        0 => Err(Error::IsolatedNode(i)),
        d => Ok(2.0 * g.m() as f64 / d as f64),
    }
}

/// Closed-form `t_bbrw(i, j) - t_srw(i, j)`; never positive.
pub fn access_time_gap(g: &Graph, i: usize, j: usize) -> Result<f64> {
    let path = tree_path(g, i, j)?;
    let d = |l: usize| g.degree(path.nodes[l]) as f64;
    let e = |l: usize| path.subtree_edge_counts[l] as f64;
    let n = path.distance();
    let hops: f64 = (0..n).map(|l| 2.0 * e(l) / d(l)).sum();
    let arrivals: f64 = (1..n).map(|l| (2.0 * e(l - 1) + 2.0) / d(l)).sum();
    Ok(-hops - arrivals)
}
