use nalgebra::{Complex, DMatrix, DVector};

use super::*;
use crate::graph::fixtures::*;
use crate::graph::generators::random_connected;
use crate::rng::stream_rng;

fn nb(g: &Graph) -> SparseRealMatrix {
    nb_matrix(g, &ArcIndex::build(g).unwrap(), false)
}

fn dense(m: &SparseRealMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m.get(r, c))
}

fn mean_degree(g: &Graph) -> f64 {
    2.0 * g.m() as f64 / g.n() as f64
}

#[test]
fn sbm_extremes() {
    let p0 = SbmParams::new(20, vec![0.5, 0.5], vec![vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
    assert_eq!(sample_sbm(&p0, 1).0.m(), 0);
    let p1 = SbmParams::new(12, vec![1.0], vec![vec![1.0]]).unwrap();
    let (g, labels) = sample_sbm(&p1, 1);
    assert_eq!(g.m(), 66);
    assert!(labels.labels.iter().all(|&l| l == 0));
}

#[test]
fn sbm_params_are_validated() {
    assert!(SbmParams::new(5, vec![0.5, 0.4], vec![vec![0.1; 2]; 2]).is_err());
    assert!(SbmParams::new(5, vec![0.5, 0.5], vec![vec![0.1, 0.2], vec![0.3, 0.1]]).is_err());
    assert!(SbmParams::new(5, vec![0.5, 0.5], vec![vec![1.5, 0.2], vec![0.2, 0.1]]).is_err());
    assert!(SbmParams::new(5, vec![0.5, 0.5], vec![vec![0.1; 3]; 2]).is_err());
    assert!(SbmParams::two_block(10, -1.0, 1.0).is_err());
    let p = SbmParams::two_block(10, 40.0, 2.0).unwrap();
    assert_eq!(p.p[0][0], 1.0);
}

#[test]
fn generators_are_deterministic() {
    let p = SbmParams::two_block(300, 8.0, 2.0).unwrap();
    assert_eq!(sample_sbm(&p, 5), sample_sbm(&p, 5));
    assert_ne!(sample_sbm(&p, 5).0, sample_sbm(&p, 6).0);
    assert_eq!(sample_er(300, 4.0, 5).unwrap(), sample_er(300, 4.0, 5).unwrap());
    assert!(sample_er(300, 0.0, 5).is_err());
    assert!(sample_er(1000, 1e-9, 5).unwrap().m() <= 1);
}

#[test]
fn sampled_mean_degrees_concentrate() {
    let p = SbmParams::two_block(3000, 16.0, 4.0).unwrap();
    for seed in 0..5 {
        let (g, labels) = sample_sbm(&p, seed);
        assert!((mean_degree(&g) - 10.0).abs() <= 1.0, "{}", mean_degree(&g));
        let ones = labels.labels.iter().filter(|&&l| l == 1).count();
        assert!((1300..1700).contains(&ones));
        let er = sample_er(3000, 10.0, seed).unwrap();
        assert!((mean_degree(&er) - 10.0).abs() <= 1.0, "{}", mean_degree(&er));
    }
}

#[test]
fn k4_leading_pair_is_exact() {
    let b = nb(&complete(4));
    let s = orthogonal_iteration(&b, 1, DEFAULT_ITERS, DEFAULT_TOL, 3).unwrap();
    assert!((s.eigenvalues[0] - 2.0).abs() <= 1e-9);
    assert!(s.converged[0]);
    let v = &s.eigenvectors[0];
    let sign = v[0].signum();
    for x in v {
        assert!((x * sign - 1.0 / 12f64.sqrt()).abs() <= 1e-9);
    }
    assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() <= 1e-10);
    assert!((s.magnitudes[0] - 2.0).abs() <= 1e-9);
}

#[test]
fn k4_converges_within_fifty_iterations() {
    // The subdominant eigenvalues of B(K4) have modulus sqrt(2), so a single
    // column only gains a factor sqrt(2) per step; a block past them does
    // not have that limit.
    let b = nb(&complete(4));
    let s = orthogonal_iteration(&b, 8, 50, DEFAULT_TOL, 4).unwrap();
    assert!((s.eigenvalues[0] - 2.0).abs() <= 1e-9);
    assert!(s.residuals[0] <= 1e-9, "{}", s.residuals[0]);
    let single = orthogonal_iteration(&b, 1, 50, DEFAULT_TOL, 4).unwrap();
    assert!(single.residuals[0] > 1e-9);
}

#[test]
fn k3_does_not_converge() {
    let s = orthogonal_iteration(&nb(&complete(3)), 1, DEFAULT_ITERS, DEFAULT_TOL, 0).unwrap();
    assert!(!s.converged[0]);
    assert!((s.magnitudes[0] - 1.0).abs() < 1e-9);
}

#[test]
fn argument_checks_and_degenerate_columns() {
    let b = nb(&path(3));
    assert!(orthogonal_iteration(&b, 0, 10, 1e-8, 0).is_err());
    assert!(orthogonal_iteration(&b, 5, 10, 1e-8, 0).is_err());
    assert!(orthogonal_iteration(&b, 1, 0, 1e-8, 0).is_err());
    // B of a path is nilpotent: columns collapse and are restarted
    let s = orthogonal_iteration(&b, 2, 20, 1e-8, 0).unwrap();
    assert_eq!(s.magnitudes, vec![0.0, 0.0]);
    assert_eq!(s.converged, vec![false, false]);
}

/// Repeatedly strips leaves. Arcs in pendant trees only contribute
/// nilpotent blocks to B, so the nonzero spectrum is unchanged.
fn two_core(g: &Graph) -> Graph {
    let mut alive = vec![true; g.n()];
    let mut deg = g.degrees();
    let mut stack: Vec<usize> = (0..g.n()).filter(|&v| deg[v] <= 1).collect();
    while let Some(v) = stack.pop() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        for &u in g.neighbors(v) {
            if alive[u] {
                deg[u] -= 1;
                if deg[u] == 1 {
                    stack.push(u);
                }
            }
        }
    }
    Graph::from_edges(g.n(), g.edges().iter().copied().filter(|&(u, v)| alive[u] && alive[v])).unwrap()
}

/// Eigenvalues of the dense matrix, largest modulus first.
fn dense_eigenvalues(m: &DMatrix<f64>) -> Option<Vec<(f64, f64)>> {
    let schur = nalgebra::Schur::try_new(m.clone(), 1e-14, 100_000)?;
    let mut ev: Vec<(f64, f64)> = schur.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect();
    ev.sort_by(|x, y| y.0.hypot(y.1).total_cmp(&x.0.hypot(x.1)));
    Some(ev)
}

/// Random connected graphs, whose second eigenvalue is usually complex, and
/// small planted partitions, where it is real.
fn oracle_corpus() -> Vec<Graph> {
    let mut out = Vec::new();
    for seed in 0..30u64 {
        let mut rng = stream_rng(seed, 30);
        let n = 8 + (seed as usize % 25);
        out.push(random_connected(n, 10 + seed as usize % 30, &mut rng));
        let p = SbmParams::two_block(36 + seed as usize % 8, 8.0, 1.0).unwrap();
        out.push(sample_sbm(&p, seed).0);
    }
    out.retain(|g| g.m() > 0 && 2 * g.m() <= 200);
    out
}

#[test]
fn matches_dense_oracle() {
    let mut compared = 0;
    let mut skipped = 0;
    for (seed, g) in oracle_corpus().into_iter().enumerate() {
        let seed = seed as u64;
        let b = nb(&g);
        let s = orthogonal_iteration(&b, 2, DEFAULT_ITERS, DEFAULT_TOL, seed).unwrap();
        if !(s.converged[0] && s.converged[1]) {
            continue;
        }
        let Some(oracle) = dense_eigenvalues(&dense(&nb(&two_core(&g)))) else {
            skipped += 1;
            continue;
        };
        assert!(oracle[0].1.abs() < 1e-9 && oracle[1].1.abs() < 1e-9, "{oracle:?}");
        let mut want = [oracle[0].0, oracle[1].0];
        let mut got = [s.eigenvalues[0], s.eigenvalues[1]];
        want.sort_by(f64::total_cmp);
        got.sort_by(f64::total_cmp);
        for k in 0..2 {
            assert!((want[k] - got[k]).abs() <= 1e-6, "seed {seed}: {got:?} vs {want:?}");
        }
        for (v, &l) in s.eigenvectors.iter().zip(&s.eigenvalues) {
            let bv = b.matvec(v);
            let r: f64 = bv.iter().zip(v).map(|(x, y)| (x - l * y).powi(2)).sum::<f64>().sqrt();
            assert!(r <= 1e-8 * l.abs());
        }
        compared += 1;
    }
    assert!(compared >= 10, "only {compared} instances compared");
    assert_eq!(skipped, 0, "dense solver failed");
}

#[test]
fn head_projection_layout() {
    let p2 = path(2);
    let ai = ArcIndex::build(&p2).unwrap();
    let (t, pinv) = head_projection(&ai, &p2).unwrap();
    let a01 = ai.arc_of(0, 1).unwrap();
    assert_eq!(t.get(a01, 1), 1.0);
    assert_eq!(pinv.get(0, ai.reverse_of(a01)), 1.0);
    assert_eq!(pinv.get(1, a01), 1.0);
    assert_eq!(pinv.get(0, a01), 0.0);

    let s3 = star(3);
    let ai_s = ArcIndex::build(&s3).unwrap();
    let (t, pinv) = head_projection(&ai_s, &s3).unwrap();
    assert!(t.row_sums().iter().all(|&x| x == 1.0));
    assert!(pinv.row_sums().iter().all(|&x| (x - 1.0).abs() < 1e-15));
    let center: Vec<(usize, f64)> = pinv.row(0).collect();
    assert_eq!(center.len(), 3);
    for (a, w) in center {
        assert_eq!(ai_s.head(a), 0);
        assert!((w - 1.0 / 3.0).abs() < 1e-15);
    }

    let lonely = Graph::from_edges(3, [(0, 1)]).unwrap();
    let ai_l = ArcIndex::build(&lonely).unwrap();
    assert_eq!(head_projection(&ai_l, &lonely).unwrap_err(), Error::IsolatedNode(2));
}

fn two_cliques() -> Graph {
    let mut edges = Vec::new();
    for base in [0, 4] {
        for u in 0..4 {
            for v in (u + 1)..4 {
                edges.push((base + u, base + v));
            }
        }
    }
    edges.push((3, 4));
    Graph::from_edges(8, edges).unwrap()
}

#[test]
fn recovery_examples() {
    let g = cycle(6);
    let ai = ArcIndex::build(&g).unwrap();
    assert!(recover_communities(&g, &ai, &vec![1.0; 12]).unwrap().labels.iter().all(|&l| l == 0));
    assert!(recover_communities(&g, &ai, &[1.0]).is_err());
    let lonely = Graph::from_edges(3, [(0, 1)]).unwrap();
    let ai_l = ArcIndex::build(&lonely).unwrap();
    assert_eq!(recover_communities(&lonely, &ai_l, &[1.0, 1.0]).unwrap().labels, vec![0, 0, 1]);

    // The community eigenvalue of two bridged K4s is the complex pair with
    // the largest real part after the Perron value (discriminant mu^2 - 8 < 0).
    let g = two_cliques();
    let ai = ArcIndex::build(&g).unwrap();
    let bd = dense(&nb_matrix(&g, &ai, false));
    let ev = dense_eigenvalues(&bd).unwrap();
    let community = ev[1..]
        .iter()
        .copied()
        .max_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)))
        .unwrap();
    let nu = complex_eigenvector(&bd, Complex::new(community.0, community.1));
    // rotate so the head averages are as real as possible
    let (_, pinv) = head_projection(&ai, &g).unwrap();
    let y: Vec<Complex<f64>> = (0..g.n())
        .map(|v| pinv.row(v).map(|(a, w)| nu[a] * w).sum())
        .collect();
    let phase = y.iter().map(|z| z * z).sum::<Complex<f64>>().arg() / 2.0;
    let rot = Complex::from_polar(1.0, -phase);
    let nu2: Vec<f64> = nu.iter().map(|z| (z * rot).re).collect();
    let labels = recover_communities(&g, &ai, &nu2).unwrap().labels;
    assert!(labels[..4].iter().all(|&l| l == labels[0]), "{labels:?}");
    assert!(labels[4..].iter().all(|&l| l == 1 - labels[0]), "{labels:?}");
}

/// Eigenvector for a known eigenvalue by complex inverse iteration.
fn complex_eigenvector(m: &DMatrix<f64>, lambda: Complex<f64>) -> Vec<Complex<f64>> {
    let n = m.nrows();
    let shift = lambda + Complex::new(1e-10, 1e-10);
    let a: DMatrix<Complex<f64>> =
        DMatrix::from_fn(n, n, |r, c| Complex::new(m[(r, c)], 0.0) - if r == c { shift } else { Complex::new(0.0, 0.0) });
    let lu = a.lu();
    let mut v = DVector::from_fn(n, |i, _| Complex::new(1.0 + i as f64 / n as f64, 0.5));
    for _ in 0..5 {
        v = lu.solve(&v).unwrap();
        let norm = v.norm();
        v /= Complex::new(norm, 0.0);
    }
    let mv: DVector<Complex<f64>> = m.map(|x| Complex::new(x, 0.0)) * &v;
    assert!((mv - &v * lambda).norm() < 1e-8);
    v.iter().copied().collect()
}

#[test]
fn alignment_examples() {
    let a = Labeling { labels: vec![0, 1, 1, 0] };
    let flipped = Labeling { labels: vec![1, 0, 0, 1] };
    assert_eq!(alignment(&a, &a).unwrap(), 1.0);
    assert_eq!(alignment(&a, &flipped).unwrap(), 1.0);
    assert_eq!(alignment(&a, &Labeling { labels: vec![0, 0, 0, 0] }).unwrap(), 0.5);
    assert!(alignment(&a, &Labeling { labels: vec![0] }).is_err());

    let mut rng = stream_rng(31, 0);
    use rand::Rng;
    let mut draw = || Labeling {
        labels: (0..10_000).map(|_| rng.random_range(0..2)).collect(),
    };
    let (x, y) = (draw(), draw());
    assert!((alignment(&x, &y).unwrap() - 0.5).abs() <= 0.02);
}

#[test]
fn classification_evidence() {
    let p = SbmParams::two_block(1500, 16.0, 4.0).unwrap();
    let (g, _) = sample_sbm(&p, 3);
    let c = classify_model(&g, DEFAULT_DELTA, 3).unwrap();
    assert_eq!(c.decision, ModelKind::Sbm);
    let json = c.to_json();
    for key in ["lambda", "residuals", "converged", "decision", "threshold"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    assert_eq!(json["decision"], "SBM");
    assert!(classify_model(&g, 0.0, 3).is_err());
    assert_eq!(classify_model(&Graph::empty(4), 0.1, 3).unwrap_err(), Error::EmptyGraph);
}
