//! Sparse matrices and minimum-norm solvers for underdetermined systems.
//!
//! Matrices are built as [`TripletMatrix`] and frozen into compressed row
//! form by [`TripletMatrix::finalize`]. A finalized [`SparseMatrix`] is
//! immutable and can be shared freely between threads.

mod cholesky;
mod minnorm;
mod ordering;
mod qr;

pub use minnorm::{least_squares_residual, solve_min_norm_chol, solve_min_norm_qr, MinNormSolveReport, SolverPath};
pub use ordering::reverse_cuthill_mckee;

use crate::error::{Error, Result};

/// Coordinate-form matrix under construction. Duplicate entries are allowed
/// and are summed on finalization.
#[derive(Debug, Clone, Default)]
pub struct TripletMatrix {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletMatrix {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, entries: Vec::new() }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self { nrows, ncols, entries: Vec::with_capacity(cap) }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        self.entries.push((row, col, value));
    }

    pub fn extend<I: IntoIterator<Item = (usize, usize, f64)>>(&mut self, it: I) {
        self.entries.extend(it);
    }

    /// Number of stored (possibly duplicated) entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sums duplicates, sorts row-major and drops explicit zeros.
    ///
    /// Duplicates are accumulated in insertion order, so the result is
    /// bit-reproducible for a given push sequence.
    pub fn finalize(self) -> Result<SparseMatrix> {
        let TripletMatrix { nrows, ncols, mut entries } = self;
        if let Some(&(i, j, _)) = entries.iter().find(|&&(i, j, _)| i >= nrows || j >= ncols) {
            return Err(Error::structural(format!(
                "entry ({i}, {j}) outside a {nrows}x{ncols} matrix"
            )));
        }
        // stable: equal keys keep insertion order
        entries.sort_by_key(|&(i, j, _)| (i, j));

        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut it = entries.into_iter().peekable();
        while let Some((i, j, mut v)) = it.next() {
            while let Some(&(i2, j2, v2)) = it.peek() {
                if i2 != i || j2 != j {
                    break;
                }
                v += v2;
                it.next();
            }
            if v != 0.0 {
                row_ptr[i + 1] += 1;
                col_idx.push(j);
                values.push(v);
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(SparseMatrix { nrows, ncols, row_ptr, col_idx, values })
    }
}

/// Finalized matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds a matrix from row-major dense data, skipping zeros.
    pub fn from_dense(nrows: usize, ncols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != nrows * ncols {
            return Err(Error::structural(format!(
                "dense buffer of length {} does not match {nrows}x{ncols}",
                data.len()
            )));
        }
        let mut t = TripletMatrix::new(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                t.push(i, j, data[i * ncols + j]);
            }
        }
        t.finalize()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    /// All stored entries in canonical (row, column) order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(move |(&j, &x)| (i, j, x))
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `y = A x`, summing each row left to right.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::structural(format!(
                "spmv: vector of length {} for a matrix with {} columns",
                x.len(),
                self.ncols
            )));
        }
        Ok((0..self.nrows)
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).fold(0.0, |acc, (&j, &a)| acc + a * x[j])
            })
            .collect())
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut count = vec![0usize; self.ncols + 1];
        for &j in &self.col_idx {
            count[j + 1] += 1;
        }
        for j in 0..self.ncols {
            count[j + 1] += count[j];
        }
        let row_ptr = count.clone();
        let mut next = count;
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                let p = next[j];
                col_idx[p] = i;
                values[p] = x;
                next[j] += 1;
            }
        }
        SparseMatrix { nrows: self.ncols, ncols: self.nrows, row_ptr, col_idx, values }
    }

    /// Row-major dense copy; meant for small matrices and tests.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.nrows * self.ncols];
        for (i, j, v) in self.iter() {
            d[i * self.ncols + j] = v;
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Keeps only the rows listed in `rows`, in that order.
    pub fn select_rows(&self, rows: &[usize]) -> SparseMatrix {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for &i in rows {
            let (c, v) = self.row(i);
            col_idx.extend_from_slice(c);
            values.extend_from_slice(v);
            row_ptr.push(col_idx.len());
        }
        SparseMatrix { nrows: rows.len(), ncols: self.ncols, row_ptr, col_idx, values }
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.ncols != other.ncols {
            return Err(Error::structural("vstack: column counts differ"));
        }
        let mut row_ptr = self.row_ptr.clone();
        let base = self.nnz();
        row_ptr.extend(other.row_ptr[1..].iter().map(|p| p + base));
        let mut col_idx = self.col_idx.clone();
        col_idx.extend_from_slice(&other.col_idx);
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Ok(SparseMatrix { nrows: self.nrows + other.nrows, ncols: self.ncols, row_ptr, col_idx, values })
    }
}

/// Which rows survived [`prune_zero_rows`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowMap {
    /// Original index of every kept row, in order.
    pub kept: Vec<usize>,
    /// Original indices of removed rows.
    pub removed: Vec<usize>,
}

impl RowMap {
    pub fn is_identity(&self) -> bool {
        self.removed.is_empty()
    }
}

/// Drops rows without stored entries.
pub fn prune_zero_rows(a: &SparseMatrix) -> (SparseMatrix, RowMap) {
    let (kept, removed): (Vec<usize>, Vec<usize>) = (0..a.nrows()).partition(|&i| a.row_nnz(i) > 0);
    (a.select_rows(&kept), RowMap { kept, removed })
}
