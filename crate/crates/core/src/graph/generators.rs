//! Random graph families used by the experiment corpora.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::Graph;
use crate::error::{Error, Result};

/// Uniform labelled tree on `n` nodes, decoded from a random Prüfer sequence.
pub fn random_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Graph {
    match n {
        0 | 1 => return Graph::empty(n),
        2 => return Graph::from_edges(2, [(0, 1)]).expect("single edge"),
        _ => {}
    }
    let prufer: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &p in &prufer {
        degree[p] += 1;
    }
    let mut leaves: BTreeSet<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &p in &prufer {
        let leaf = leaves.pop_first().expect("a Prüfer decode always has a leaf");
        edges.push((leaf, p));
        degree[p] -= 1;
        if degree[p] == 1 {
            leaves.insert(p);
        }
    }
    let last: Vec<usize> = leaves.into_iter().collect();
    edges.push((last[0], last[1]));
    Graph::from_edges(n, edges).expect("Prüfer decode yields a simple tree")
}

/// Connected graph: a random spanning tree plus `extra` additional random
/// edges (duplicates collapse, so the final count may be lower).
pub fn random_connected<R: Rng + ?Sized>(n: usize, extra: usize, rng: &mut R) -> Graph {
    let tree = random_tree(n, rng);
    if n < 3 {
        return tree;
    }
    let mut edges = tree.edges().to_vec();
    for _ in 0..extra {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v {
            edges.push((u, v));
        }
    }
    Graph::from_edges(n, edges).expect("self-loops filtered")
}

/// Uniform simple `d`-regular graph by the pairing model with rejection.
pub fn random_regular<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Graph> {
    if d >= n || (n * d) % 2 == 1 {
        return Err(Error::InvalidArgument(format!("no simple {d}-regular graph on {n} nodes")));
    }
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    'attempt: for _ in 0..10_000 {
        stubs.shuffle(rng);
        let mut seen = BTreeSet::new();
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
        }
        return Graph::from_edges(n, seen);
    }
    Err(Error::InvalidArgument(format!(
        "pairing model kept failing for n={n}, d={d}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn trees_are_trees() {
        let mut rng = stream_rng(3, 0);
        for n in 1..60 {
            let t = random_tree(n, &mut rng);
            assert_eq!(t.n(), n);
            assert!(t.is_tree(), "n={n}");
        }
    }

    #[test]
    fn connected_graphs_are_connected() {
        let mut rng = stream_rng(4, 0);
        for n in 2..40 {
            let g = random_connected(n, n / 2, &mut rng);
            assert!(g.is_connected());
            assert!(g.m() >= n - 1);
        }
    }

    #[test]
    fn regular_graphs_are_regular() {
        let mut rng = stream_rng(5, 0);
        let g = random_regular(20, 3, &mut rng).unwrap();
        assert!(g.degrees().iter().all(|&d| d == 3));
        assert_eq!(g.m(), 30);
        assert!(random_regular(5, 3, &mut rng).is_err());
    }
}
