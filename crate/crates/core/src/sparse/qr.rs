//! Multifrontal Householder QR of `Aᵀ` with rank detection.
//!
//! Columns of `Aᵀ` (rows of `A`) are reordered to limit fill and then
//! postordered along their elimination tree. Chains of columns with nested
//! structure are grouped into fronts. Each front is a small dense matrix
//! assembled from the rows of `Aᵀ` that start in it and from the update
//! blocks of its children; it is reduced by Householder reflections and
//! passes its trailing block to its parent.
//!
//! A fully summed column whose remaining norm does not exceed the rank
//! threshold is declared dead: its entries are discarded and no row of `R`
//! is produced for it.
//!
//! The reflectors are kept together with the row slots they act on, so
//! `Q` and `Qᵀ` can be applied afterwards without being formed.

use super::ordering::{order_rows, RowOrder};
use super::SparseMatrix;

const NONE: usize = usize::MAX;

/// A finished row of `R`.
#[derive(Debug, Clone)]
struct Row {
    /// Row of `Aᵀ` this row of `R` occupies in `Q`'s frame.
    slot: u32,
    /// Sorted positions; the first one is the diagonal.
    idx: Vec<u32>,
    val: Vec<f64>,
}

impl Row {
    fn diag(&self) -> f64 {
        self.val[0]
    }

    /// Entries to the right of the diagonal as `(position, value)`.
    fn for_each_offdiag(&self, mut f: impl FnMut(usize, f64)) {
        for (&j, &v) in self.idx.iter().zip(&self.val).skip(1) {
            f(j as usize, v);
        }
    }
}

/// `H = I − τ v vᵀ` acting on `slots[first..first + len]` of its front,
/// with `v[0] = 1` implicit and the rest stored at `arena[offset..]`.
#[derive(Debug, Clone, Copy)]
struct Reflector {
    front: u32,
    first: u32,
    len: u32,
    offset: usize,
    tau: f64,
}

/// Update block handed from a front to its parent: dense rows over
/// `cols`, stored column-major.
struct Contribution {
    cols: Vec<u32>,
    slots: Vec<u32>,
    data: Vec<f64>,
}

/// Elimination tree of `AAᵀ` in position numbering, from the column
/// structure of `Aᵀ` (Liu's algorithm with path compression).
fn etree(col_rows: &[Vec<u32>], n: usize) -> Vec<usize> {
    let m = col_rows.len();
    let mut parent = vec![NONE; m];
    let mut ancestor = vec![NONE; m];
    let mut prev = vec![NONE; n];
    for k in 0..m {
        for &i in &col_rows[k] {
            let mut node = prev[i as usize];
            while node != NONE && node < k {
                let next = ancestor[node];
                ancestor[node] = k;
                if next == NONE {
                    parent[node] = k;
                }
                node = next;
            }
            prev[i as usize] = k;
        }
    }
    parent
}

/// Postorder of a forest given by `parent`; children are visited in
/// increasing order.
fn postorder(parent: &[usize]) -> Vec<usize> {
    let m = parent.len();
    let mut head = vec![NONE; m];
    let mut next = vec![NONE; m];
    for k in (0..m).rev() {
        if parent[k] != NONE {
            next[k] = head[parent[k]];
            head[parent[k]] = k;
        }
    }
    let mut order = Vec::with_capacity(m);
    let mut stack = Vec::new();
    for root in (0..m).filter(|&k| parent[k] == NONE) {
        stack.push(root);
        while let Some(&top) = stack.last() {
            let child = head[top];
            if child == NONE {
                order.push(top);
                stack.pop();
            } else {
                head[top] = next[child];
                stack.push(child);
            }
        }
    }
    order
}

/// Triangular factor `R` of `P Aᵀ`-columns, with dead columns removed.
pub(crate) struct QrFactor {
    /// `perm[position] = original row of A`.
    perm: Vec<usize>,
    rows: Vec<Option<Row>>,
    rank: usize,
    /// Number of rows of `Aᵀ`.
    n: usize,
    /// Row slots of every front, in the order its reflectors use them.
    front_slots: Vec<Vec<u32>>,
    reflectors: Vec<Reflector>,
    arena: Vec<f64>,
}

impl QrFactor {
    /// `at` must be the transpose of `a`; `tol` is the absolute threshold
    /// below which a pivot column is declared dead.
    pub(crate) fn new(a: &SparseMatrix, at: &SparseMatrix, tol: f64) -> Self {
        let m = a.nrows();
        let n = at.nrows();
        let (fill_perm, _) = order_rows(a, at, RowOrder::Fill);
        let cols_of = |perm: &[usize]| -> Vec<Vec<u32>> {
            perm.iter().map(|&old| a.row(old).0.iter().map(|&i| i as u32).collect()).collect()
        };
        let post = postorder(&etree(&cols_of(&fill_perm), n));
        let perm: Vec<usize> = post.iter().map(|&k| fill_perm[k]).collect();
        let parent = etree(&cols_of(&perm), n);
        let mut pos = vec![0u32; m];
        for (p, &old) in perm.iter().enumerate() {
            pos[old] = p as u32;
        }

        // rows of Aᵀ in position numbering, grouped by their leading position
        let mut lead_rows: Vec<Vec<u32>> = vec![Vec::new(); m];
        let mut row_pos: Vec<Vec<(u32, f64)>> = Vec::with_capacity(n);
        for i in 0..n {
            let (cols, vals) = at.row(i);
            let mut e: Vec<(u32, f64)> = cols.iter().zip(vals).map(|(&c, &v)| (pos[c], v)).collect();
            e.sort_unstable_by_key(|x| x.0);
            if let Some(&(l, _)) = e.first() {
                lead_rows[l as usize].push(i as u32);
            }
            row_pos.push(e);
        }

        // symbolic pass: structure size of every row of R
        let mut nchild = vec![0usize; m];
        for k in 0..m {
            if parent[k] != NONE {
                nchild[parent[k]] += 1;
            }
        }
        let mut count = vec![0usize; m];
        {
            let mut mark = vec![NONE; m];
            let mut stack: Vec<Vec<u32>> = Vec::new();
            for k in 0..m {
                let mut st = vec![k as u32];
                mark[k] = k;
                for _ in 0..nchild[k] {
                    let child = stack.pop().expect("postorder keeps children on top");
                    for &j in &child[1..] {
                        if mark[j as usize] != k {
                            mark[j as usize] = k;
                            st.push(j);
                        }
                    }
                }
                for &i in &lead_rows[k] {
                    for &(j, _) in &row_pos[i as usize] {
                        if mark[j as usize] != k {
                            mark[j as usize] = k;
                            st.push(j);
                        }
                    }
                }
                st.sort_unstable();
                count[k] = st.len();
                stack.push(st);
            }
        }

        // fundamental supernodes
        let mut front_start = Vec::new();
        for k in 0..m {
            let merge = k > 0 && parent[k - 1] == k && nchild[k] == 1 && count[k - 1] == count[k] + 1;
            if !merge {
                front_start.push(k);
            }
        }
        let nf = front_start.len();
        front_start.push(m);
        let mut front_of = vec![0usize; m];
        for f in 0..nf {
            for k in front_start[f]..front_start[f + 1] {
                front_of[k] = f;
            }
        }
        let mut front_nchild = vec![0usize; nf];
        for f in 0..nf {
            let last = front_start[f + 1] - 1;
            if parent[last] != NONE {
                front_nchild[front_of[parent[last]]] += 1;
            }
        }

        // numeric pass
        let mut rows: Vec<Option<Row>> = vec![None; m];
        let mut front_slots = Vec::with_capacity(nf);
        let mut reflectors = Vec::new();
        let mut arena = Vec::new();
        let mut stack: Vec<Contribution> = Vec::new();
        let mut local = vec![NONE; m];
        for f in 0..nf {
            let (k0, k1) = (front_start[f], front_start[f + 1]);
            let children: Vec<Contribution> = (0..front_nchild[f]).map(|_| stack.pop().expect("child block")).collect();

            let mut cols: Vec<u32> = Vec::new();
            let mut add = |j: u32, cols: &mut Vec<u32>| {
                if local[j as usize] == NONE {
                    local[j as usize] = 0;
                    cols.push(j);
                }
            };
            for k in k0..k1 {
                add(k as u32, &mut cols);
                for &i in &lead_rows[k] {
                    for &(j, _) in &row_pos[i as usize] {
                        add(j, &mut cols);
                    }
                }
            }
            for c in &children {
                for &j in &c.cols {
                    add(j, &mut cols);
                }
            }
            cols.sort_unstable();
            for (l, &j) in cols.iter().enumerate() {
                local[j as usize] = l;
            }
            let nc = cols.len();
            let s = k1 - k0;

            // (leading local column, source) of every front row
            enum Src {
                Orig(u32),
                Child(usize, usize),
            }
            let mut srcs: Vec<(usize, u32, Src)> = Vec::new();
            for k in k0..k1 {
                for &i in &lead_rows[k] {
                    srcs.push((local[k], i, Src::Orig(i)));
                }
            }
            for (ci, c) in children.iter().enumerate() {
                let nr = c.slots.len();
                for r in 0..nr {
                    let lead = (0..c.cols.len()).find(|&jj| c.data[jj * nr + r] != 0.0);
                    if let Some(jj) = lead {
                        srcs.push((local[c.cols[jj] as usize], c.slots[r], Src::Child(ci, r)));
                    }
                }
            }
            srcs.sort_by_key(|x| (x.0, x.1));
            let p = srcs.len();
            let mut fm = vec![0.0; p * nc];
            let mut slots = Vec::with_capacity(p);
            for (r, (_, slot, src)) in srcs.iter().enumerate() {
                slots.push(*slot);
                match *src {
                    Src::Orig(i) => {
                        for &(j, v) in &row_pos[i as usize] {
                            fm[local[j as usize] * p + r] = v;
                        }
                    }
                    Src::Child(ci, cr) => {
                        let c = &children[ci];
                        let nr = c.slots.len();
                        for (jj, &j) in c.cols.iter().enumerate() {
                            fm[local[j as usize] * p + r] = c.data[jj * nr + cr];
                        }
                    }
                }
            }
            drop(children);
            // stair[j]: rows whose leading column is at most j
            let mut stair = vec![0usize; nc];
            {
                let mut r = 0;
                for (j, st) in stair.iter_mut().enumerate() {
                    while r < p && srcs[r].0 <= j {
                        r += 1;
                    }
                    *st = r;
                }
            }

            let mut r = 0;
            let mut r_after_pivots = 0;
            for j in 0..nc {
                if j == s {
                    r_after_pivots = r;
                }
                if r >= p {
                    if j >= s {
                        break;
                    }
                    continue;
                }
                let e = stair[j].max(r);
                let col = &mut fm[j * p..(j + 1) * p];
                let norm = col[r..e].iter().map(|x| x * x).sum::<f64>().sqrt();
                let pivot = j < s;
                if (pivot && norm <= tol) || norm == 0.0 {
                    if pivot {
                        col[r..e].iter_mut().for_each(|x| *x = 0.0);
                    }
                    continue;
                }
                let alpha = col[r];
                let beta = if alpha >= 0.0 { -norm } else { norm };
                let tau = (beta - alpha) / beta;
                let scale = 1.0 / (alpha - beta);
                let offset = arena.len();
                for x in &mut col[r + 1..e] {
                    *x *= scale;
                }
                arena.extend_from_slice(&col[r + 1..e]);
                col[r] = beta;
                for x in &mut col[r + 1..e] {
                    *x = 0.0;
                }
                let v = &arena[offset..];
                for jj in j + 1..nc {
                    let c2 = &mut fm[jj * p + r..jj * p + e];
                    let w = tau * (c2[0] + v.iter().zip(&c2[1..]).map(|(a, b)| a * b).sum::<f64>());
                    if w != 0.0 {
                        c2[0] -= w;
                        for (x, vi) in c2[1..].iter_mut().zip(v) {
                            *x -= w * vi;
                        }
                    }
                }
                reflectors.push(Reflector { front: f as u32, first: r as u32, len: (e - r) as u32, offset, tau });
                if pivot {
                    let mut idx = Vec::with_capacity(nc - j);
                    let mut val = Vec::with_capacity(nc - j);
                    for jj in j..nc {
                        let x = fm[jj * p + r];
                        if x != 0.0 || jj == j {
                            idx.push(cols[jj]);
                            val.push(x);
                        }
                    }
                    rows[cols[j] as usize] = Some(Row { slot: slots[r], idx, val });
                }
                r += 1;
            }
            if s == nc {
                r_after_pivots = r;
            }
            let r_end = r;
            for &j in &cols {
                local[j as usize] = NONE;
            }
            let last = k1 - 1;
            if parent[last] != NONE {
                let nr = r_end - r_after_pivots;
                let ccols: Vec<u32> = cols[s..].to_vec();
                let mut data = vec![0.0; nr * ccols.len()];
                for jj in 0..ccols.len() {
                    for rr in 0..nr {
                        data[jj * nr + rr] = fm[(s + jj) * p + r_after_pivots + rr];
                    }
                }
                stack.push(Contribution { cols: ccols, slots: slots[r_after_pivots..r_end].to_vec(), data });
            }
            front_slots.push(slots);
        }
        let rank = rows.iter().filter(|r| r.is_some()).count();
        QrFactor { perm, rows, rank, n, front_slots, reflectors, arena }
    }

    fn apply_reflector(&self, h: &Reflector, x: &mut [f64]) {
        let slots = &self.front_slots[h.front as usize][h.first as usize..(h.first + h.len) as usize];
        let v = &self.arena[h.offset..h.offset + h.len as usize - 1];
        let w = h.tau * (x[slots[0] as usize] + v.iter().zip(&slots[1..]).map(|(vi, &sl)| vi * x[sl as usize]).sum::<f64>());
        x[slots[0] as usize] -= w;
        for (vi, &sl) in v.iter().zip(&slots[1..]) {
            x[sl as usize] -= w * vi;
        }
    }

    pub(crate) fn rank(&self) -> usize {
        self.rank
    }

    /// Minimum-norm solution of the live rows of `A x = b`:
    /// `x = Q [R⁻ᵀ b; 0]`. Entries of `b` at dead rows are ignored.
    pub(crate) fn solve_min_norm(&self, b: &[f64]) -> Vec<f64> {
        let m = self.perm.len();
        let mut c: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        let mut x = vec![0.0; self.n];
        for k in 0..m {
            if let Some(r) = &self.rows[k] {
                let zk = c[k] / r.diag();
                x[r.slot as usize] = zk;
                r.for_each_offdiag(|j, v| c[j] -= v * zk);
            }
        }
        for h in self.reflectors.iter().rev() {
            self.apply_reflector(h, &mut x);
        }
        x
    }

    /// Least-squares solution of `Aᵀ y ≈ r` over the live positions,
    /// `y = R⁻¹ (Qᵀ r)`, returned in the original row numbering of `A`.
    pub(crate) fn solve_least_squares(&self, r: &[f64]) -> Vec<f64> {
        let mut t = r.to_vec();
        for h in &self.reflectors {
            self.apply_reflector(h, &mut t);
        }
        let m = self.perm.len();
        let mut y = vec![0.0; m];
        for k in (0..m).rev() {
            if let Some(row) = &self.rows[k] {
                let mut s = t[row.slot as usize];
                row.for_each_offdiag(|j, v| s -= v * y[j]);
                y[k] = s / row.diag();
            }
        }
        let mut out = vec![0.0; m];
        for (k, &old) in self.perm.iter().enumerate() {
            out[old] = y[k];
        }
        out
    }

    /// Mask of rows of `A` that are part of the numerically independent set.
    pub(crate) fn live_rows(&self) -> Vec<bool> {
        let mut mask = vec![false; self.perm.len()];
        for (k, &old) in self.perm.iter().enumerate() {
            mask[old] = self.rows[k].is_some();
        }
        mask
    }
}
