//! Dense symmetric indefinite factorization (Bunch–Kaufman `L D Lᵀ`).

/// Pivots below this fraction of the largest matrix entry count as zero.
pub const PIVOT_THRESHOLD: f64 = 1e-12;

/// `P A Pᵀ = L D Lᵀ` with unit lower `L` and 1×1/2×2 diagonal blocks `D`.
#[derive(Debug, Clone)]
pub struct LdlFactor {
    n: usize,
    /// Row-major; strictly lower part holds `L`, the block diagonal holds `D`.
    a: Vec<f64>,
    /// Interchange applied at step `k`: rows/columns `swaps[k].0` and `.1`.
    swaps: Vec<(usize, usize)>,
    /// Size of the diagonal block starting at each index (0 for the second
    /// index of a 2×2 block).
    block: Vec<u8>,
}

impl LdlFactor {
    /// Factors the symmetric row-major `n×n` matrix `a` (only the lower
    /// triangle is read). Returns `None` if a pivot is numerically zero.
    pub fn new(mut a: Vec<f64>, n: usize) -> Option<Self> {
        assert_eq!(a.len(), n * n, "matrix buffer does not match dimension");
        for i in 0..n {
            for j in i + 1..n {
                a[i * n + j] = a[j * n + i];
            }
        }
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if n > 0 && scale == 0.0 {
            return None;
        }
        let tol = PIVOT_THRESHOLD * scale;
        let alpha = (1.0 + 17f64.sqrt()) / 8.0;
        let mut swaps = Vec::new();
        let mut block = vec![0u8; n];
        let at = |a: &Vec<f64>, i: usize, j: usize| a[i * n + j];

        let mut k = 0;
        while k < n {
            let absakk = at(&a, k, k).abs();
            let (imax, colmax) = (k + 1..n)
                .map(|i| (i, at(&a, i, k).abs()))
                .fold((k, 0.0), |best, c| if c.1 > best.1 { c } else { best });
            if absakk.max(colmax) <= tol {
                return None;
            }
            let (kp, kstep) = if absakk >= alpha * colmax {
                (k, 1)
            } else {
                let rowmax = (k..n).filter(|&j| j != imax).map(|j| at(&a, imax, j).abs()).fold(0.0, f64::max);
                if absakk * rowmax >= alpha * colmax * colmax {
                    (k, 1)
                } else if at(&a, imax, imax).abs() >= alpha * rowmax {
                    (imax, 1)
                } else {
                    (imax, 2)
                }
            };
            let kk = k + kstep - 1;
            if kp != kk {
                for j in 0..n {
                    a.swap(kk * n + j, kp * n + j);
                }
                for i in 0..n {
                    a.swap(i * n + kk, i * n + kp);
                }
            }
            swaps.push((kk, kp));

            if kstep == 1 {
                let d = at(&a, k, k);
                if d.abs() <= tol {
                    return None;
                }
                for i in k + 1..n {
                    let li = at(&a, i, k) / d;
                    for j in k + 1..=i {
                        let v = a[i * n + j] - li * at(&a, j, k);
                        a[i * n + j] = v;
                        a[j * n + i] = v;
                    }
                }
                for i in k + 1..n {
                    a[i * n + k] /= d;
                    a[k * n + i] = 0.0;
                }
                block[k] = 1;
            } else {
                let (d11, d21, d22) = (at(&a, k, k), at(&a, k + 1, k), at(&a, k + 1, k + 1));
                let det = d11 * d22 - d21 * d21;
                // |det| / ‖E‖ estimates the smaller singular value of the block
                if det.abs() <= tol * d11.abs().max(d21.abs()).max(d22.abs()) {
                    return None;
                }
                let mut l = Vec::with_capacity(n - k - 2);
                for i in k + 2..n {
                    let (x0, x1) = (at(&a, i, k), at(&a, i, k + 1));
                    l.push(((d22 * x0 - d21 * x1) / det, (d11 * x1 - d21 * x0) / det));
                }
                for i in k + 2..n {
                    let (l0, l1) = l[i - k - 2];
                    for j in k + 2..=i {
                        let v = a[i * n + j] - l0 * at(&a, j, k) - l1 * at(&a, j, k + 1);
                        a[i * n + j] = v;
                        a[j * n + i] = v;
                    }
                }
                for i in k + 2..n {
                    let (l0, l1) = l[i - k - 2];
                    a[i * n + k] = l0;
                    a[i * n + k + 1] = l1;
                    a[k * n + i] = 0.0;
                    a[(k + 1) * n + i] = 0.0;
                }
                block[k] = 2;
            }
            k += kstep;
        }
        Some(Self { n, a, swaps, block })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n, "right-hand side does not match dimension");
        let a = &self.a;
        let mut x = b.to_vec();
        for &(i, j) in &self.swaps {
            x.swap(i, j);
        }
        // L z = P b, columns in block order
        let mut k = 0;
        while k < n {
            let s = self.block[k] as usize;
            for c in k..k + s {
                let xc = x[c];
                for i in k + s..n {
                    x[i] -= a[i * n + c] * xc;
                }
            }
            k += s;
        }
        // D w = z
        let mut k = 0;
        while k < n {
            if self.block[k] == 1 {
                x[k] /= a[k * n + k];
                k += 1;
            } else {
                let (d11, d21, d22) = (a[k * n + k], a[(k + 1) * n + k], a[(k + 1) * n + k + 1]);
                let det = d11 * d22 - d21 * d21;
                let (y0, y1) = (x[k], x[k + 1]);
                x[k] = (d22 * y0 - d21 * y1) / det;
                x[k + 1] = (d11 * y1 - d21 * y0) / det;
                k += 2;
            }
        }
        // Lᵀ u = w
        for c in (0..n).rev() {
            let first = if c + 1 < n && self.block[c + 1] == 0 { c + 2 } else { c + 1 };
            let start = first.max(c + 1);
            let s: f64 = (start..n).map(|i| a[i * n + c] * x[i]).sum();
            x[c] -= s;
        }
        for &(i, j) in self.swaps.iter().rev() {
            x.swap(i, j);
        }
        x
    }
}
