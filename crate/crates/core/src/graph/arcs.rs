use std::collections::HashMap;

use super::Graph;
use crate::error::{Error, Result};

/// Dense ids for the directed arcs of a graph.
///
/// Edge `k` (in insertion order, oriented `u -> v` as first seen) owns arcs
/// `2k = u -> v` and `2k + 1 = v -> u`, so the reverse of arc `a` is `a ^ 1`.
#[derive(Debug, Clone)]
pub struct ArcIndex {
    arcs: Vec<(usize, usize)>,
    arc_of: HashMap<(usize, usize), usize>,
    outgoing: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
}

impl ArcIndex {
    pub fn build(g: &Graph) -> Result<Self> {
        if g.m() == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut arcs = Vec::with_capacity(2 * g.m());
        let mut arc_of = HashMap::with_capacity(2 * g.m());
        let mut outgoing = vec![Vec::new(); g.n()];
        let mut incoming = vec![Vec::new(); g.n()];
        for &(u, v) in g.edges() {
            for (tail, head) in [(u, v), (v, u)] {
                let id = arcs.len();
                arcs.push((tail, head));
                arc_of.insert((tail, head), id);
                outgoing[tail].push(id);
                incoming[head].push(id);
            }
        }
        Ok(ArcIndex {
            arcs,
            arc_of,
            outgoing,
            incoming,
        })
    }

    /// Number of arcs, `2m`.
    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn num_nodes(&self) -> usize {
        self.outgoing.len()
    }

    /// `(tail, head)` of arc `a`.
    pub fn arc(&self, a: usize) -> (usize, usize) {
        self.arcs[a]
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn tail(&self, a: usize) -> usize {
        self.arcs[a].0
    }

    pub fn head(&self, a: usize) -> usize {
        self.arcs[a].1
    }

    pub fn arc_of(&self, tail: usize, head: usize) -> Option<usize> {
        self.arc_of.get(&(tail, head)).copied()
    }

    pub fn reverse_of(&self, a: usize) -> usize {
        a ^ 1
    }

    /// Undirected edge id owning arc `a`.
    pub fn edge_of(&self, a: usize) -> usize {
        a >> 1
    }

    /// Arcs with tail `v`, ascending id.
    pub fn outgoing(&self, v: usize) -> &[usize] {
        &self.outgoing[v]
    }

    /// Arcs with head `v`, ascending id.
    pub fn incoming(&self, v: usize) -> &[usize] {
        &self.incoming[v]
    }
}
