use ndarray::Array2;

use crate::error::{Error, Result};

/// Row-compressed sparse real matrix with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRealMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseRealMatrix {
    /// Builds from `(row, col, value)` triplets in any order. Duplicate
    /// positions, out-of-range indices and non-finite values are rejected.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut prev = None;
        for &(r, c, v) in &triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::ShapeError(format!(
                    "entry ({r}, {c}) outside {nrows}x{ncols}"
                )));
            }
            if prev == Some((r, c)) {
                return Err(Error::InvalidArgument(format!("duplicate entry ({r}, {c})")));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite entry at ({r}, {c})")));
            }
            prev = Some((r, c));
            indptr[r + 1] += 1;
            indices.push(c);
            values.push(v);
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        Ok(SparseRealMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        })
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let n = values.len();
        Self::from_triplets(n, n, values.iter().enumerate().map(|(i, &v)| (i, i, v)).collect())
    }

    pub fn identity(n: usize) -> Self {
        SparseRealMatrix {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Number of stored entries (explicit zeros included).
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let (cols, vals) = self.row_slices(row);
        cols.binary_search(&col).map_or(0.0, |k| vals[k])
    }

    /// Stored `(col, value)` pairs of `row`, ascending column.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (cols, vals) = self.row_slices(row);
        cols.iter().copied().zip(vals.iter().copied())
    }

    fn row_slices(&self, row: usize) -> (&[usize], &[f64]) {
        let span = self.indptr[row]..self.indptr[row + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    /// All stored entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows).map(|r| self.row_slices(r).1.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols];
        for (c, v) in self.indices.iter().zip(&self.values) {
            out[*c] += v;
        }
        out
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "matvec dimension mismatch");
        (0..self.nrows)
            .map(|r| {
                let (cols, vals) = self.row_slices(r);
                cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
            })
            .collect()
    }

    /// `self^T x`.
    pub fn transpose_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows, "transpose_matvec dimension mismatch");
        let mut out = vec![0.0; self.ncols];
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0.0 {
                continue;
            }
            let (cols, vals) = self.row_slices(r);
            for (&c, &v) in cols.iter().zip(vals) {
                out[c] += v * xr;
            }
        }
        out
    }

    /// `self * dense`.
    pub fn mul_dense(&self, dense: &Array2<f64>) -> Array2<f64> {
        assert_eq!(dense.nrows(), self.ncols, "mul_dense dimension mismatch");
        let mut out = Array2::zeros((self.nrows, dense.ncols()));
        for r in 0..self.nrows {
            let mut out_row = out.row_mut(r);
            for (c, v) in self.row(r) {
                out_row.scaled_add(v, &dense.row(c));
            }
        }
        out
    }

    /// `self^T * dense`.
    pub fn transpose_mul_dense(&self, dense: &Array2<f64>) -> Array2<f64> {
        assert_eq!(dense.nrows(), self.nrows, "transpose_mul_dense dimension mismatch");
        let mut out = Array2::zeros((self.ncols, dense.ncols()));
        for r in 0..self.nrows {
            let src = dense.row(r);
            for (c, v) in self.row(r) {
                out.row_mut(c).scaled_add(v, &src);
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let triplets = self.triplets().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, triplets)
            .expect("transpose of a valid matrix is valid")
    }

    /// `self + I`; requires a square matrix.
    pub fn plus_identity(&self) -> Self {
        assert!(self.is_square(), "plus_identity on a non-square matrix");
        let mut triplets: Vec<_> = self.triplets().filter(|&(r, c, _)| r != c).collect();
        triplets.extend((0..self.nrows).map(|i| (i, i, 1.0 + self.get(i, i))));
        Self::from_triplets(self.nrows, self.ncols, triplets).expect("valid shape")
    }

    /// `diag(left) * self * diag(right)`.
    pub fn scale(&self, left: &[f64], right: &[f64]) -> Self {
        assert_eq!(left.len(), self.nrows);
        assert_eq!(right.len(), self.ncols);
        let mut out = self.clone();
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                out.values[k] *= left[r] * right[self.indices[k]];
            }
        }
        out
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.nrows, self.ncols));
        for (r, c, v) in self.triplets() {
            out[[r, c]] = v;
        }
        out
    }
}
