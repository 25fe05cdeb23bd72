//! Orthogonal iteration with Rayleigh–Ritz extraction.

use nalgebra::{DMatrix, DVector, Schur};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::SparseRealMatrix;
use crate::rng::{stream_rng, streams};

pub const DEFAULT_ITERS: usize = 500;
pub const DEFAULT_TOL: f64 = 1e-8;

/// Columns whose norm drops below this after orthogonalization are replaced.
const DEGENERATE_NORM: f64 = 1e-12;

/// Leading eigenpair estimates, ordered by decreasing modulus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    /// Real parts of the Ritz values.
    pub eigenvalues: Vec<f64>,
    /// Growth rate of each orthonormalized column, as a geometric mean over
    /// the final iterations. Tracks `|lambda_i|` also when the Ritz value
    /// does not settle (complex bulk).
    pub magnitudes: Vec<f64>,
    /// Unit vectors of length `2m`.
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    /// `||B v - lambda v||`.
    pub residuals: Vec<f64>,
    /// `residual <= tol * |lambda|` for a real Ritz value.
    pub converged: Vec<bool>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthogonalizes `col` against `basis` (two passes) and returns its norm.
fn orthogonalize(col: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        for q in basis {
            let c = dot(col, q);
            col.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
    }
    norm(col)
}

/// Repeats `X <- orth(B X)` on `f` columns, then extracts Ritz pairs from
/// `H = Q^T B Q`.
///
/// A column that collapses during Gram–Schmidt is replaced by a fresh random
/// column; `DegenerateStart` is raised only if the replacement collapses too.
pub fn orthogonal_iteration(
    b: &SparseRealMatrix,
    f: usize,
    iters: usize,
    tol: f64,
    seed: u64,
) -> Result<Spectrum> {
    let dim = b.nrows();
    if !b.is_square() {
        return Err(Error::ShapeError("orthogonal iteration needs a square matrix".into()));
    }
    if f == 0 || f > dim {
        return Err(Error::InvalidArgument(format!("f = {f} must lie in 1..={dim}")));
    }
    if iters == 0 {
        return Err(Error::InvalidArgument("iters must be at least 1".into()));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }

    let mut start = stream_rng(seed, streams::EIGEN_START);
    let mut restart = stream_rng(seed, streams::EIGEN_RESTART);
    let random_column = |rng: &mut crate::rng::StreamRng| -> Vec<f64> {
        (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()
    };

    let mut q: Vec<Vec<f64>> = Vec::with_capacity(f);
    for _ in 0..f {
        let mut col = random_column(&mut start);
        let nrm = orthogonalize(&mut col, &q);
        if nrm < DEGENERATE_NORM {
            return Err(Error::DegenerateStart);
        }
        col.iter_mut().for_each(|x| *x /= nrm);
        q.push(col);
    }

    let window = (iters / 2).clamp(1, 100);
    let mut log_growth = vec![0.0f64; f];
    let mut collapsed = vec![false; f];
    for it in 0..iters {
        let mut next: Vec<Vec<f64>> = Vec::with_capacity(f);
        let in_window = it + window >= iters;
        for i in 0..f {
            let mut col = b.matvec(&q[i]);
            let mut nrm = orthogonalize(&mut col, &next);
            if in_window {
                if nrm > 0.0 {
                    log_growth[i] += nrm.ln();
                } else {
                    collapsed[i] = true;
                }
            }
            if nrm < DEGENERATE_NORM {
                col = random_column(&mut restart);
                nrm = orthogonalize(&mut col, &next);
                if nrm < DEGENERATE_NORM {
                    return Err(Error::DegenerateStart);
                }
            }
            col.iter_mut().for_each(|x| *x /= nrm);
            next.push(col);
        }
        q = next;
    }
    let magnitudes: Vec<f64> = (0..f)
        .map(|i| {
            if collapsed[i] {
                0.0
            } else {
                (log_growth[i] / window as f64).exp()
            }
        })
        .collect();

    let bq: Vec<Vec<f64>> = q.iter().map(|c| b.matvec(c)).collect();
    let h = DMatrix::from_fn(f, f, |r, c| dot(&q[r], &bq[c]));
    let mut ritz: Vec<(f64, f64)> = match Schur::try_new(h.clone(), 1e-14, 10_000) {
        Some(schur) => schur.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect(),
        // diagonal Rayleigh quotients when the small QR algorithm stalls
        None => h.diagonal().iter().map(|&d| (d, 0.0)).collect(),
    };
    ritz.sort_by(|x, y| {
        let (mx, my) = (x.0.hypot(x.1), y.0.hypot(y.1));
        my.total_cmp(&mx).then(y.0.total_cmp(&x.0)).then(y.1.total_cmp(&x.1))
    });

    let mut spectrum = Spectrum {
        eigenvalues: Vec::with_capacity(f),
        magnitudes,
        eigenvectors: Vec::with_capacity(f),
        residuals: Vec::with_capacity(f),
        converged: Vec::with_capacity(f),
    };
    for (i, &(re, im)) in ritz.iter().enumerate() {
        let real = im.abs() <= 1e-10 * re.abs().max(1.0);
        let mut v = if real {
            let y = ritz_vector(&h, re);
            let mut v = vec![0.0; dim];
            for (k, col) in q.iter().enumerate() {
                v.iter_mut().zip(col).for_each(|(a, c)| *a += y[k] * c);
            }
            v
        } else {
            q[i].clone()
        };
        let nrm = norm(&v);
        v.iter_mut().for_each(|x| *x /= nrm);
        let bv = b.matvec(&v);
        let residual = bv.iter().zip(&v).map(|(x, y)| (x - re * y).powi(2)).sum::<f64>().sqrt();
        spectrum.eigenvalues.push(re);
        spectrum.residuals.push(residual);
        spectrum.converged.push(real && residual <= tol * re.abs());
        spectrum.eigenvectors.push(v);
    }
    Ok(spectrum)
}

/// Null vector of `H - theta I` by inverse iteration.
fn ritz_vector(h: &DMatrix<f64>, theta: f64) -> DVector<f64> {
    let f = h.nrows();
    let scale = h.norm().max(1.0);
    let mut y = DVector::from_element(f, 1.0 / (f as f64).sqrt());
    let mut shift = 1e-13 * scale;
    for _ in 0..4 {
        let m = h - DMatrix::identity(f, f) * (theta + shift);
        match m.lu().solve(&y) {
            Some(z) if z.iter().all(|x| x.is_finite()) && z.norm() > 0.0 => {
                y = &z / z.norm();
            }
            _ => shift *= 1e3,
        }
    }
    y
}
