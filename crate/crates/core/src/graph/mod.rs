//! Simple undirected graphs and the arc-level operators built on them.

mod arcs;
pub mod generators;
mod operators;
mod sparse;

use std::collections::{HashSet, VecDeque};
use std::io::BufRead;

use crate::error::{Error, Result};

pub use arcs::ArcIndex;
pub use operators::{
    incidence, nb_degree, nb_matrix, nb_transition_count, normalized_adj, normalized_nb,
};
pub use sparse::SparseRealMatrix;

/// Undirected simple graph over nodes `0..n`.
///
/// Edges keep the order in which they were first added; arc ids in
/// [`ArcIndex`] follow that order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Graph with `n` isolated nodes.
    pub fn empty(n: usize) -> Self {
        Graph {
            adjacency: vec![Vec::new(); n],
            edges: Vec::new(),
        }
    }

    /// Builds a graph from an edge sequence. Duplicate edges (in either
    /// orientation) collapse to one; self-loops are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::empty(n);
        let mut seen = HashSet::new();
        for (idx, (u, v)) in edges.into_iter().enumerate() {
            if u == v {
                return Err(Error::MalformedInput {
                    line: idx + 1,
                    reason: format!("self-loop on node {u}"),
                });
            }
            for node in [u, v] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if seen.insert((u.min(v), u.max(v))) {
                g.edges.push((u, v));
                g.adjacency[u].push(v);
                g.adjacency[v].push(u);
            }
        }
        for nbrs in &mut g.adjacency {
            nbrs.sort_unstable();
        }
        Ok(g)
    }

    /// Reads the line-oriented edge-list format: one `u v` pair per line,
    /// `#` comment lines and blank lines skipped, LF or CRLF endings.
    /// The node count is one more than the largest id mentioned.
    pub fn from_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_id: Option<usize> = None;
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::MalformedInput {
                line: lineno,
                reason: e.to_string(),
            })?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let mut next_id = || -> Result<usize> {
                let tok = tokens.next().ok_or_else(|| Error::MalformedInput {
                    line: lineno,
                    reason: "expected two node ids".into(),
                })?;
                tok.parse::<usize>().map_err(|_| Error::MalformedInput {
                    line: lineno,
                    reason: format!("invalid node id {tok:?}"),
                })
            };
            let u = next_id()?;
            let v = next_id()?;
            if let Some(extra) = tokens.next() {
                return Err(Error::MalformedInput {
                    line: lineno,
                    reason: format!("unexpected token {extra:?}"),
                });
            }
            if u == v {
                return Err(Error::MalformedInput {
                    line: lineno,
                    reason: format!("self-loop on node {u}"),
                });
            }
            max_id = Some(max_id.unwrap_or(0).max(u).max(v));
            edges.push((u, v));
        }
        let n = max_id.map_or(0, |m| m + 1);
        Graph::from_edges(n, edges)
    }

    pub fn parse_edge_list(text: &str) -> Result<Self> {
        Graph::from_edge_list(text.as_bytes())
    }

    /// Edge-list text accepted by [`Graph::from_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Sorted neighbor list of `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// Edges in insertion order, with their first-seen orientation.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn check_node(&self, node: usize) -> Result<()> {
        if node < self.n() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange { node, n: self.n() })
        }
    }

    pub fn is_connected(&self) -> bool {
        self.n() == 0 || bfs_distances(self, 0).iter().all(Option::is_some)
    }

    pub fn is_tree(&self) -> bool {
        self.n() > 0 && self.m() + 1 == self.n() && self.is_connected()
    }

    /// Same graph with node `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n() {
            return Err(Error::ShapeError(format!(
                "permutation of length {} for {} nodes",
                perm.len(),
                self.n()
            )));
        }
        Graph::from_edges(self.n(), self.edges.iter().map(|&(u, v)| (perm[u], perm[v])))
    }
}

/// Hop distances from `source`; `None` marks unreachable nodes.
pub fn bfs_distances(g: &Graph, source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.n()];
    if source >= g.n() {
        return dist;
    }
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap_or(0);
        for &v in g.neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::Graph;

    pub fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    pub fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    pub fn complete(n: usize) -> Graph {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Graph::from_edges(n, edges).unwrap()
    }

    /// Star with center 0 and leaves `1..=leaves`.
    pub fn star(leaves: usize) -> Graph {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|l| (0, l))).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn parses_two_edge_path() {
        let g = Graph::parse_edge_list("0 1\n1 2").unwrap();
        assert_eq!((g.n(), g.m()), (3, 2));
        assert_eq!(g.neighbors(1), &[0, 2]);
    }

    #[test]
    fn collapses_duplicates_and_skips_comments() {
        let g = Graph::parse_edge_list("0 1\n1 0\n# note").unwrap();
        assert_eq!((g.n(), g.m()), (2, 1));
    }

    #[test]
    fn accepts_crlf_and_blank_lines() {
        let g = Graph::parse_edge_list("# header\r\n\r\n0 1\r\n  2 1  \r\n").unwrap();
        assert_eq!((g.n(), g.m()), (3, 2));
    }

    #[test]
    fn rejects_self_loop() {
        let err = Graph::parse_edge_list("0 0").unwrap_err();
        assert!(matches!(err, Error::MalformedInput { line: 1, .. }));
    }

    #[test]
    fn rejects_bad_tokens() {
        for text in ["0 x", "0", "0 1 2", "-1 2", "0 1\n3"] {
            assert!(
                matches!(Graph::parse_edge_list(text), Err(Error::MalformedInput { .. })),
                "{text:?}"
            );
        }
    }

    #[test]
    fn empty_input_gives_empty_graph() {
        let g = Graph::parse_edge_list("# nothing\n").unwrap();
        assert_eq!((g.n(), g.m()), (0, 0));
    }

    #[test]
    fn bfs_on_small_graphs() {
        let d = |g: &Graph| bfs_distances(g, 0);
        assert_eq!(d(&path(3)), vec![Some(0), Some(1), Some(2)]);
        assert_eq!(d(&complete(3)), vec![Some(0), Some(1), Some(1)]);
        let two = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(d(&two)[2], None);
        assert!(!two.is_connected());
    }

    #[test]
    fn tree_detection() {
        assert!(path(5).is_tree());
        assert!(star(3).is_tree());
        assert!(!cycle(3).is_tree());
        assert!(!Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap().is_tree());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = star(4);
        assert_eq!(Graph::parse_edge_list(&g.to_edge_list()).unwrap(), g);
    }
}
