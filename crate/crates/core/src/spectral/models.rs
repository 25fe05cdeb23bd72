//! Stochastic block model and Erdős–Rényi sampling.

use rand::Rng;
use serde::Serialize;

use super::Labeling;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{stream_rng, streams};

/// `n` nodes, community `c` drawn with probability `alpha[c]`, and an edge
/// between communities `c, c'` with probability `p[c][c']`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SbmParams {
    pub n: usize,
    pub alpha: Vec<f64>,
    pub p: Vec<Vec<f64>>,
}

impl SbmParams {
    pub fn new(n: usize, alpha: Vec<f64>, p: Vec<Vec<f64>>) -> Result<Self> {
        let k = alpha.len();
        if k == 0 {
            return Err(Error::InvalidArgument("at least one community is required".into()));
        }
        if alpha.iter().any(|a| !(a.is_finite() && *a >= 0.0))
            || (alpha.iter().sum::<f64>() - 1.0).abs() > 1e-12
        {
            return Err(Error::InvalidArgument(format!("alpha {alpha:?} is not a distribution")));
        }
        if p.len() != k || p.iter().any(|row| row.len() != k) {
            return Err(Error::ShapeError(format!("P must be {k} x {k}")));
        }
        for a in 0..k {
            for b in 0..k {
                if !(0.0..=1.0).contains(&p[a][b]) {
                    return Err(Error::InvalidArgument(format!("P[{a}][{b}] = {} is not a probability", p[a][b])));
                }
                if p[a][b] != p[b][a] {
                    return Err(Error::InvalidArgument("P must be symmetric".into()));
                }
            }
        }
        Ok(SbmParams { n, alpha, p })
    }

    /// Two balanced communities with edge probabilities `a/n` inside and
    /// `b/n` across, clipped to 1.
    pub fn two_block(n: usize, a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidArgument(format!("a = {a} and b = {b} must be non-negative")));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        let pin = (a / n as f64).min(1.0);
        let pout = (b / n as f64).min(1.0);
        SbmParams::new(n, vec![0.5, 0.5], vec![vec![pin, pout], vec![pout, pin]])
    }

    pub fn k(&self) -> usize {
        self.alpha.len()
    }
}

/// Bernoulli edges over all unordered pairs, visited as `u < v`.
fn bernoulli_pairs<R: Rng>(n: usize, rng: &mut R, prob: impl Fn(usize, usize) -> f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = prob(u, v);
            if p > 0.0 && rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).expect("pairs are distinct and in range")
}

pub fn sample_sbm(params: &SbmParams, seed: u64) -> (Graph, Labeling) {
    let mut crng = stream_rng(seed, streams::COMMUNITIES);
    let k = params.k();
    let labels: Vec<usize> = (0..params.n)
        .map(|_| {
            let u: f64 = crng.random();
            let mut acc = 0.0;
            params
                .alpha
                .iter()
                .position(|&a| {
                    acc += a;
                    u < acc
                })
                .unwrap_or(k - 1)
        })
        .collect();
    let mut grng = stream_rng(seed, streams::GRAPH);
    let g = bernoulli_pairs(params.n, &mut grng, |u, v| params.p[labels[u]][labels[v]]);
    (g, Labeling { labels })
}

/// Erdős–Rényi graph with edge probability `min(c/n, 1)`.
pub fn sample_er(n: usize, c: f64, seed: u64) -> Result<Graph> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidArgument(format!("mean degree c must be positive, got {c}")));
    }
    let p = if n == 0 { 0.0 } else { (c / n as f64).min(1.0) };
    let mut rng = stream_rng(seed, streams::GRAPH);
    Ok(bernoulli_pairs(n, &mut rng, |_, _| p))
}
