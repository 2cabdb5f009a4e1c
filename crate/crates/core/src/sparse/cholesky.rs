//! Envelope Cholesky factorization of `A Aᵀ + ωI`.

use super::ordering::{order_rows, RowOrder};
use super::SparseMatrix;

/// Lower triangle of the reordered Gram matrix `P A Aᵀ Pᵀ` in envelope
/// (variable band) storage: row `i` holds columns `first[i]..=i`.
pub(crate) struct Envelope {
    perm: Vec<usize>,
    first: Vec<usize>,
    ptr: Vec<usize>,
    vals: Vec<f64>,
}

impl Envelope {
    /// `at` must be the transpose of `a`.
    pub(crate) fn gram(a: &SparseMatrix, at: &SparseMatrix) -> Self {
        let m = a.nrows();
        let (perm, _) = order_rows(a, at, RowOrder::Profile);
        let mut pos = vec![0usize; m];
        for (p, &old) in perm.iter().enumerate() {
            pos[old] = p;
        }
        let mut first: Vec<usize> = (0..m).collect();
        for j in 0..at.nrows() {
            let (rows, _) = at.row(j);
            if let Some(lo) = rows.iter().map(|&r| pos[r]).min() {
                for &r in rows {
                    let p = pos[r];
                    first[p] = first[p].min(lo);
                }
            }
        }
        let mut ptr = Vec::with_capacity(m + 1);
        ptr.push(0);
        for i in 0..m {
            ptr.push(ptr[i] + i - first[i] + 1);
        }
        let mut vals = vec![0.0; ptr[m]];
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for j in 0..at.nrows() {
            let (rows, v) = at.row(j);
            entries.clear();
            entries.extend(rows.iter().zip(v).map(|(&r, &x)| (pos[r], x)));
            for &(p, vp) in &entries {
                let base = ptr[p] - first[p];
                for &(q, vq) in &entries {
                    if q <= p {
                        vals[base + q] += vp * vq;
                    }
                }
            }
        }
        Envelope { perm, first, ptr, vals }
    }

    pub(crate) fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Factors `G + ωI` in place of a copy. Returns `None` when a pivot
    /// falls below `ω / 2` (or is not positive when `ω = 0`).
    pub(crate) fn factor(&self, omega: f64) -> Option<CholFactor> {
        let m = self.dim();
        let mut l = self.vals.clone();
        for i in 0..m {
            let fi = self.first[i];
            let bi = self.ptr[i] - fi;
            for j in fi..i {
                let fj = self.first[j];
                let bj = self.ptr[j] - fj;
                let lo = fi.max(fj);
                let dot: f64 = l[bi + lo..bi + j].iter().zip(&l[bj + lo..bj + j]).map(|(x, y)| x * y).sum();
                l[bi + j] = (l[bi + j] - dot) / l[bj + j];
            }
            let row = &l[bi + fi..bi + i];
            let d = l[bi + i] + omega - row.iter().map(|x| x * x).sum::<f64>();
            if !(d > 0.0 && d >= 0.5 * omega) {
                return None;
            }
            l[bi + i] = d.sqrt();
        }
        Some(CholFactor { first: self.first.clone(), ptr: self.ptr.clone(), l })
    }

    /// Applies the row ordering: `out[position] = v[perm[position]]`.
    pub(crate) fn permute(&self, v: &[f64]) -> Vec<f64> {
        self.perm.iter().map(|&old| v[old]).collect()
    }

    pub(crate) fn unpermute(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (p, &old) in self.perm.iter().enumerate() {
            out[old] = v[p];
        }
        out
    }
}

pub(crate) struct CholFactor {
    first: Vec<usize>,
    ptr: Vec<usize>,
    l: Vec<f64>,
}

impl CholFactor {
    /// Solves `L Lᵀ y = b` in the permuted numbering.
    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = self.first.len();
        let mut y = b.to_vec();
        for i in 0..m {
            let fi = self.first[i];
            let bi = self.ptr[i] - fi;
            let dot: f64 = self.l[bi + fi..bi + i].iter().zip(&y[fi..i]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - dot) / self.l[bi + i];
        }
        for i in (0..m).rev() {
            let fi = self.first[i];
            let bi = self.ptr[i] - fi;
            y[i] /= self.l[bi + i];
            let yi = y[i];
            for j in fi..i {
                y[j] -= self.l[bi + j] * yi;
            }
        }
        y
    }
}
