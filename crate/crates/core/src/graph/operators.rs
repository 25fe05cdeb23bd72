//! Arc-level operators: non-backtracking matrix, its normalization, the
//! arc/node incidence and the self-loop normalized adjacency.

use super::{ArcIndex, Graph, SparseRealMatrix};

/// Non-backtracking matrix over arcs.
///
/// Row `l -> k`, column `j -> i` holds 1 when `k == j` and `l != i`: column
/// arcs are the non-backtracking successors of the row arc. With
/// `begrudging`, an arc whose head is a leaf additionally gets its own reverse
/// as the single successor.
pub fn nb_matrix(g: &Graph, ai: &ArcIndex, begrudging: bool) -> SparseRealMatrix {
    let mut triplets = Vec::with_capacity(nb_transition_count(g) + ai.len());
    for (a, &(tail, head)) in ai.arcs().iter().enumerate() {
        for &b in ai.outgoing(head) {
            if ai.head(b) != tail {
                triplets.push((a, b, 1.0));
            }
        }
        if begrudging && g.degree(head) == 1 {
            triplets.push((a, ai.reverse_of(a), 1.0));
        }
    }
    SparseRealMatrix::from_triplets(ai.len(), ai.len(), triplets)
        .expect("non-backtracking transitions are unique")
}

/// Number of non-backtracking transitions, `sum_j d_j (d_j - 1)`.
pub fn nb_transition_count(g: &Graph) -> usize {
    g.degrees().iter().map(|&d| d * d.saturating_sub(1)).sum()
}

/// Diagonal matrix of successor counts (row sums of `b`).
pub fn nb_degree(b: &SparseRealMatrix) -> SparseRealMatrix {
    assert!(b.is_square(), "nb_degree expects a square matrix");
    SparseRealMatrix::diagonal(&b.row_sums()).expect("row sums of a finite matrix are finite")
}

/// `(D + I)^{-1/2} (B + I) (D + I)^{-1/2}`.
pub fn normalized_nb(b: &SparseRealMatrix, d: &SparseRealMatrix) -> SparseRealMatrix {
    let scale: Vec<f64> = (0..d.nrows())
        .map(|a| 1.0 / (d.get(a, a) + 1.0).sqrt())
        .collect();
    b.plus_identity().scale(&scale, &scale)
}

/// Arc/node incidence `C` (1 where the node is either endpoint of the arc)
/// and its symmetrized form `C~ = C + C∘reverse`, which is 2 on both
/// endpoints.
pub fn incidence(g: &Graph, ai: &ArcIndex) -> (SparseRealMatrix, SparseRealMatrix) {
    let build = |value: f64| {
        let triplets = ai
            .arcs()
            .iter()
            .enumerate()
            .flat_map(|(a, &(t, h))| [(a, t, value), (a, h, value)])
            .collect();
        SparseRealMatrix::from_triplets(ai.len(), g.n(), triplets).expect("simple graph")
    };
    (build(1.0), build(2.0))
}

/// `D~^{-1/2} (A + I) D~^{-1/2}` with `D~ = D + I`.
pub fn normalized_adj(g: &Graph) -> SparseRealMatrix {
    let inv_sqrt: Vec<f64> = g
        .degrees()
        .iter()
        .map(|&d| 1.0 / ((d + 1) as f64).sqrt())
        .collect();
    let mut triplets = Vec::with_capacity(2 * g.m() + g.n());
    for i in 0..g.n() {
        triplets.push((i, i, inv_sqrt[i] * inv_sqrt[i]));
        for &j in g.neighbors(i) {
            triplets.push((i, j, inv_sqrt[i] * inv_sqrt[j]));
        }
    }
    SparseRealMatrix::from_triplets(g.n(), g.n(), triplets).expect("simple graph")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use ndarray::Array2;
    use proptest::prelude::*;

    fn arcs(g: &Graph) -> ArcIndex {
        ArcIndex::build(g).unwrap()
    }

    #[test]
    fn single_edge_has_no_nb_transitions() {
        let g = path(2);
        let b = nb_matrix(&g, &arcs(&g), false);
        assert_eq!(b.nnz(), 0);
        let bb = nb_matrix(&g, &arcs(&g), true);
        assert_eq!(bb.to_dense(), ndarray::array![[0.0, 1.0], [1.0, 0.0]]);
    }

    #[test]
    fn triangle_nb_matrix_is_order_three_permutation() {
        let g = complete(3);
        let b = nb_matrix(&g, &arcs(&g), false).to_dense();
        assert_eq!(b.iter().filter(|&&v| v != 0.0).count(), 6);
        for r in 0..6 {
            assert_eq!(b.row(r).sum(), 1.0);
            assert_eq!(b.column(r).sum(), 1.0);
        }
        assert_eq!(b.dot(&b).dot(&b), Array2::<f64>::eye(6));
    }

    #[test]
    fn star_nb_count() {
        let g = star(3);
        let ai = arcs(&g);
        let b = nb_matrix(&g, &ai, false);
        assert_eq!(b.nnz(), 6);
        // leaf -> center continues to the two other leaves
        let l1 = ai.arc_of(1, 0).unwrap();
        assert_eq!(b.get(l1, ai.arc_of(0, 2).unwrap()), 1.0);
        assert_eq!(b.get(l1, ai.arc_of(0, 1).unwrap()), 0.0);
    }

    #[test]
    fn nb_degree_on_path_and_triangle() {
        let g = path(3);
        let ai = arcs(&g);
        let d = nb_degree(&nb_matrix(&g, &ai, false));
        let a01 = ai.arc_of(0, 1).unwrap();
        let a12 = ai.arc_of(1, 2).unwrap();
        assert_eq!(d.get(a01, a01), 1.0);
        assert_eq!(d.get(a12, a12), 0.0);

        let k3 = complete(3);
        let d3 = nb_degree(&nb_matrix(&k3, &arcs(&k3), false));
        assert!((0..6).all(|a| d3.get(a, a) == 1.0));
    }

    #[test]
    fn normalized_nb_examples() {
        let k3 = complete(3);
        let b = nb_matrix(&k3, &arcs(&k3), false);
        let bh = normalized_nb(&b, &nb_degree(&b));
        for (r, c, v) in bh.triplets() {
            assert!((v - 0.5).abs() < 1e-15, "({r},{c}) = {v}");
        }
        assert_eq!(bh.nnz(), 12);

        let p2 = path(2);
        let b = nb_matrix(&p2, &arcs(&p2), false);
        assert_eq!(normalized_nb(&b, &nb_degree(&b)).to_dense(), Array2::<f64>::eye(2));

        let s3 = star(3);
        let ai = arcs(&s3);
        let b = nb_matrix(&s3, &ai, false);
        let bh = normalized_nb(&b, &nb_degree(&b));
        let v = bh.get(ai.arc_of(1, 0).unwrap(), ai.arc_of(0, 2).unwrap());
        assert!((v - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((v - 0.5774).abs() < 1e-4);
    }

    #[test]
    fn incidence_examples() {
        let p2 = path(2);
        let (c, ct) = incidence(&p2, &arcs(&p2));
        assert_eq!(c.to_dense(), Array2::<f64>::ones((2, 2)));
        assert_eq!(ct.to_dense(), Array2::from_elem((2, 2), 2.0));

        let k3 = complete(3);
        let ai = arcs(&k3);
        let (c, _) = incidence(&k3, &ai);
        let col0: Vec<usize> = (0..ai.len()).filter(|&a| c.get(a, 0) == 1.0).collect();
        let expect: Vec<usize> = ["01", "10", "02", "20"]
            .iter()
            .map(|s| {
                let b = s.as_bytes();
                ai.arc_of((b[0] - b'0') as usize, (b[1] - b'0') as usize).unwrap()
            })
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        assert_eq!(col0, expect);
    }

    #[test]
    fn normalized_adj_examples() {
        let k3 = normalized_adj(&complete(3)).to_dense();
        assert!(k3.iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
        let sq = k3.dot(&k3);
        assert!(sq.iter().zip(k3.iter()).all(|(a, b)| (a - b).abs() < 1e-15));

        assert!(normalized_adj(&path(2)).to_dense().iter().all(|&v| (v - 0.5).abs() < 1e-15));

        let c5 = normalized_adj(&cycle(5)).to_dense();
        assert!((c5.dot(&c5)[[0, 2]] - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn normalized_adj_rows_can_exceed_one() {
        // Star center: 1/4 + 3/sqrt(8) > 1, so only the Cauchy-Schwarz bound holds.
        let a = normalized_adj(&star(3));
        assert!(a.row_sums()[0] > 1.0);
    }

    prop_compose! {
        fn arb_graph(max_n: usize)(n in 2..=max_n)
            (n in Just(n), pairs in prop::collection::vec((0..n, 0..n), 1..4 * n))
            -> Graph
        {
            Graph::from_edges(n, pairs.into_iter().filter(|(u, v)| u != v)).unwrap()
        }
    }

    proptest! {
        #[test]
        fn nb_nnz_matches_degree_formula(g in arb_graph(64)) {
            prop_assume!(g.m() > 0);
            let ai = arcs(&g);
            prop_assert_eq!(ai.len(), 2 * g.m());
            let b = nb_matrix(&g, &ai, false);
            prop_assert_eq!(b.nnz(), nb_transition_count(&g));
            for a in 0..ai.len() {
                let r = ai.reverse_of(a);
                prop_assert!(r != a && ai.reverse_of(r) == a);
                prop_assert_eq!(b.get(a, r), 0.0);
                let (t, h) = ai.arc(a);
                prop_assert_eq!(ai.arc_of(t, h), Some(a));
            }
            // begrudging adds exactly one transition per arc into a leaf
            let leaf_arcs = (0..ai.len()).filter(|&a| g.degree(ai.head(a)) == 1).count();
            prop_assert_eq!(nb_matrix(&g, &ai, true).nnz(), b.nnz() + leaf_arcs);
        }

        #[test]
        fn normalized_nb_matches_entrywise_formula(g in arb_graph(40), begrudging in any::<bool>()) {
            prop_assume!(g.m() > 0);
            let ai = arcs(&g);
            let b = nb_matrix(&g, &ai, begrudging);
            let d = nb_degree(&b);
            let bh = normalized_nb(&b, &d);
            let bi = b.plus_identity();
            prop_assert_eq!(bh.nnz(), bi.nnz());
            for (r, c, v) in bh.triplets() {
                prop_assert_eq!(bi.get(r, c), 1.0);
                let expect = 1.0 / ((d.get(r, r) + 1.0) * (d.get(c, c) + 1.0)).sqrt();
                prop_assert!((v - expect).abs() < 1e-12);
            }
            if !begrudging {
                for a in 0..ai.len() {
                    let head = ai.head(a);
                    prop_assert_eq!(d.get(a, a), (g.degree(head) - 1) as f64);
                }
            }
        }

        #[test]
        fn incidence_columns_and_rows(g in arb_graph(40)) {
            prop_assume!(g.m() > 0);
            let ai = arcs(&g);
            let (c, ct) = incidence(&g, &ai);
            prop_assert!(c.row_sums().iter().all(|&s| s == 2.0));
            for (i, s) in c.col_sums().iter().enumerate() {
                prop_assert_eq!(*s, 2.0 * g.degree(i) as f64);
            }
            for (a, i, v) in ct.triplets() {
                let (t, h) = ai.arc(a);
                prop_assert!(v == 2.0 && (i == t || i == h));
            }
        }

        #[test]
        fn normalized_adj_row_sums(g in arb_graph(40)) {
            let a = normalized_adj(&g);
            let deg = g.degrees();
            let sums = a.row_sums();
            let sqrt_d1: Vec<f64> = deg.iter().map(|&d| ((d + 1) as f64).sqrt()).collect();
            let fixed = a.matvec(&sqrt_d1);
            for i in 0..g.n() {
                let closed: f64 = std::iter::once(i)
                    .chain(g.neighbors(i).iter().copied())
                    .map(|j| 1.0 / (((deg[i] + 1) * (deg[j] + 1)) as f64).sqrt())
                    .sum();
                prop_assert!((sums[i] - closed).abs() < 1e-12);
                let cs: f64 = std::iter::once(i)
                    .chain(g.neighbors(i).iter().copied())
                    .map(|j| 1.0 / (deg[j] + 1) as f64)
                    .sum::<f64>()
                    .sqrt();
                prop_assert!(sums[i] <= cs + 1e-12);
                prop_assert!((fixed[i] - sqrt_d1[i]).abs() < 1e-12);
            }
        }
    }
}
