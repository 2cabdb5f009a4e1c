//! Uniform tensor-product B-splines on an axis-aligned box and their
//! collocation matrices.

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, DomainModel, Point};
use crate::par;
use crate::sparse::{SparseMatrix, TripletMatrix};

/// Knot spacing of the spline space relative to `h`.
pub const KNOT_SPACING_RATIO: f64 = 4.0;

/// Open uniform knot vector on `[a, b]` with `n` intervals of width
/// `step`; the end knots are repeated `q` times.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    pub a: f64,
    pub step: f64,
    pub n: usize,
    pub q: usize,
}

impl KnotVector {
    pub fn b(&self) -> f64 {
        self.a + self.n as f64 * self.step
    }

    /// Knot `i` of the full vector, `0 ≤ i < n + 2q − 1`.
    pub fn knot(&self, i: usize) -> f64 {
        let j = i.saturating_sub(self.q - 1).min(self.n);
        if j == self.n {
            self.b()
        } else {
            self.a + j as f64 * self.step
        }
    }

    pub fn knots(&self) -> Vec<f64> {
        (0..self.n + 2 * self.q - 1).map(|i| self.knot(i)).collect()
    }

    pub fn n_basis(&self) -> usize {
        self.n + self.q - 1
    }

    /// Index of the knot interval containing `t`; the right end belongs
    /// to the last interval.
    pub fn interval(&self, t: f64) -> Option<usize> {
        if !(t >= self.a && t <= self.b()) {
            return None;
        }
        Some((((t - self.a) / self.step).floor() as usize).min(self.n - 1))
    }

    /// Values of the B-splines of order `order ≤ q` that are nonzero on
    /// interval `iv`, at `t` (Cox–de Boor).
    fn basis_order(&self, iv: usize, t: f64, order: usize) -> Vec<f64> {
        let mu = iv + self.q - 1;
        let mut nv = vec![0.0; order];
        let mut left = vec![0.0; order];
        let mut right = vec![0.0; order];
        nv[0] = 1.0;
        for j in 1..order {
            left[j] = t - self.knot(mu + 1 - j);
            right[j] = self.knot(mu + j) - t;
            let mut saved = 0.0;
            for r in 0..j {
                let tmp = nv[r] / (right[r + 1] + left[j - r]);
                nv[r] = saved + right[r + 1] * tmp;
                saved = left[j - r] * tmp;
            }
            nv[j] = saved;
        }
        nv
    }

    /// First basis index and the `q` values (or first derivatives) of the
    /// B-splines that are nonzero at `t`.
    pub fn eval_local(&self, t: f64, deriv: bool) -> Option<(usize, Vec<f64>)> {
        let iv = self.interval(t)?;
        let q = self.q;
        if !deriv {
            return Some((iv, self.basis_order(iv, t, q)));
        }
        if q == 1 {
            return Some((iv, vec![0.0]));
        }
        // N'_{i,p} = p/(t_{i+p} − t_i) N_{i,p−1} − p/(t_{i+p+1} − t_{i+1}) N_{i+1,p−1}
        let low = self.basis_order(iv, t, q - 1);
        let p = (q - 1) as f64;
        let mut out = vec![0.0; q];
        for (r, o) in out.iter_mut().enumerate() {
            let i = iv + r;
            let mut v = 0.0;
            if r >= 1 {
                let den = self.knot(i + q - 1) - self.knot(i);
                if den > 0.0 {
                    v += p * low[r - 1] / den;
                }
            }
            if r < q - 1 {
                let den = self.knot(i + q) - self.knot(i + 1);
                if den > 0.0 {
                    v -= p * low[r] / den;
                }
            }
            *o = v;
        }
        Some((iv, out))
    }

    /// Greville abscissae: the coefficients reproducing `t ↦ t`.
    pub fn greville(&self) -> Vec<f64> {
        let q = self.q;
        (0..self.n_basis())
            .map(|j| {
                if q == 1 {
                    self.a + (j as f64 + 0.5) * self.step
                } else {
                    (1..q).map(|k| self.knot(j + k)).sum::<f64>() / (q - 1) as f64
                }
            })
            .collect()
    }
}

/// Tensor product of open uniform knot vectors with a common spacing.
/// Flat basis indices run over axis 0 fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSplineSpace {
    pub d: usize,
    pub q: usize,
    pub h_s: f64,
    pub axes: Vec<KnotVector>,
}

impl TensorSplineSpace {
    /// Space on the smallest box with sides a multiple of `h_s` that
    /// contains `bbox` and has the same center.
    pub fn on_box(bbox: &BoundingBox, d: usize, h_s: f64, q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::structural(format!("spline order must be at least 2, got {q}")));
        }
        if !(h_s > 0.0 && h_s.is_finite()) {
            return Err(Error::structural(format!("knot spacing must be positive, got {h_s}")));
        }
        let axes = (0..d)
            .map(|k| {
                let (lo, hi) = (bbox.lo[k], bbox.hi[k]);
                let n = (((hi - lo) / h_s) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
                let c = 0.5 * (lo + hi);
                KnotVector { a: c - 0.5 * n as f64 * h_s, step: h_s, n, q }
            })
            .collect();
        Ok(Self { d, q, h_s, axes })
    }

    pub fn n_basis(&self) -> usize {
        self.axes.iter().map(KnotVector::n_basis).product()
    }

    pub fn bounding_box(&self) -> BoundingBox {
        let mut b = BoundingBox { lo: [0.0; 3], hi: [0.0; 3] };
        for (k, ax) in self.axes.iter().enumerate() {
            b.lo[k] = ax.a;
            b.hi[k] = ax.b();
        }
        b
    }

    pub fn flat_index(&self, multi: [usize; 3]) -> usize {
        let mut idx = 0;
        for k in (0..self.d).rev() {
            idx = idx * self.axes[k].n_basis() + multi[k];
        }
        idx
    }

    /// Tensor B-splines nonzero at `p`: values, or the partial derivative
    /// along axis `deriv`. Returns `q^d` `(flat index, value)` pairs.
    pub fn eval_local(&self, p: Point, deriv: Option<usize>) -> Result<Vec<(usize, f64)>> {
        let mut per_axis = Vec::with_capacity(self.d);
        for (k, ax) in self.axes.iter().enumerate() {
            let (first, vals) = ax
                .eval_local(p[k], deriv == Some(k))
                .ok_or_else(|| Error::data(format!("point {p:?} lies outside the spline box")))?;
            per_axis.push((first, vals));
        }
        let q = self.q;
        let total = q.pow(self.d as u32);
        let mut out = Vec::with_capacity(total);
        for t in 0..total {
            let mut multi = [0usize; 3];
            let mut v = 1.0;
            let mut rem = t;
            for (k, (first, vals)) in per_axis.iter().enumerate() {
                let r = rem % q;
                rem /= q;
                multi[k] = first + r;
                v *= vals[r];
            }
            out.push((self.flat_index(multi), v));
        }
        Ok(out)
    }

    /// Evaluates the spline with coefficients `coeffs` (or its partial along `deriv`).
    pub fn eval(&self, p: Point, coeffs: &[f64], deriv: Option<usize>) -> Result<f64> {
        Ok(self.eval_local(p, deriv)?.into_iter().map(|(j, v)| coeffs[j] * v).sum())
    }

    /// Coefficients of the coordinate function `x ↦ x_axis`.
    pub fn coordinate_coefficients(&self, axis: usize) -> Vec<f64> {
        let g = self.axes[axis].greville();
        let mut out = Vec::with_capacity(self.n_basis());
        let counts: Vec<usize> = self.axes.iter().map(KnotVector::n_basis).collect();
        for idx in 0..self.n_basis() {
            let mut rem = idx;
            let mut multi = [0usize; 3];
            for k in 0..self.d {
                multi[k] = rem % counts[k];
                rem /= counts[k];
            }
            out.push(g[multi[axis]]);
        }
        out
    }
}

/// Spline space for `domain` at spacing `h`: knot spacing `ratio·h` on the
/// domain's bounding box rounded outward.
pub fn make_space(domain: &DomainModel, h: f64, q: usize, ratio: f64) -> Result<TensorSplineSpace> {
    if !(h > 0.0 && ratio > 0.0) {
        return Err(Error::structural("spacing and ratio must be positive"));
    }
    TensorSplineSpace::on_box(&domain.bounding_box(), domain.dim(), ratio * h, q)
}

/// Divergence collocation matrix of shape `N_Y × d·N_S`; block `k` holds
/// `∂x_k s_j(y_i)`.
pub fn assemble_l_div_bsp(space: &TensorSplineSpace, y: &[Point]) -> Result<SparseMatrix> {
    let (d, ns) = (space.d, space.n_basis());
    let rows = par::map_range(y.len(), |i| -> Result<Vec<(usize, f64)>> {
        let mut row = Vec::with_capacity(d * space.q.pow(d as u32));
        for k in 0..d {
            row.extend(space.eval_local(y[i], Some(k))?.into_iter().map(|(j, v)| (k * ns + j, v)));
        }
        Ok(row)
    });
    collect(rows, d * ns)
}

/// Normal-trace collocation matrix of shape `N_Z × d·N_S`; block `k`
/// holds `ν_k(z_i) s_j(z_i)`.
pub fn assemble_b_normal_bsp(space: &TensorSplineSpace, z: &[Point], normals: &[Point]) -> Result<SparseMatrix> {
    if z.len() != normals.len() {
        return Err(Error::structural("boundary nodes and normals differ in count"));
    }
    let (d, ns) = (space.d, space.n_basis());
    let rows = par::map_range(z.len(), |i| -> Result<Vec<(usize, f64)>> {
        let vals = space.eval_local(z[i], None)?;
        Ok((0..d).flat_map(|k| vals.iter().map(move |&(j, v)| (k * ns + j, normals[i][k] * v))).collect())
    });
    collect(rows, d * ns)
}

fn collect(rows: Vec<Result<Vec<(usize, f64)>>>, ncols: usize) -> Result<SparseMatrix> {
    let mut t = TripletMatrix::new(rows.len(), ncols);
    for (i, r) in rows.into_iter().enumerate() {
        for (j, v) in r? {
            t.push(i, j, v);
        }
    }
    t.finalize()
}
