//! Polyharmonic RBF-FD differentiation weights and the divergence /
//! normal-trace matrices assembled from them.
//!
//! Weights for a functional `λ` at a point `c` on stencil `x_1..x_n` solve
//!
//! ```text
//! [ K  P ] [w]   [λ(‖· − x_j‖^p)]
//! [ Pᵀ 0 ] [μ] = [λ(monomials)  ]
//! ```
//!
//! with `K_jk = ‖x_j − x_k‖^p`, `p = 2q − 1`, and `P` the monomials of total
//! degree below `q`. Coordinates are shifted to `c` and divided by the
//! stencil radius before the system is built.

use std::fmt;
use std::str::FromStr;

use crate::dense::LdlFactor;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::nodegen::NeighborIndex;
use crate::par;
use crate::sparse::{SparseMatrix, TripletMatrix};

/// Linear functional applied at the evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    Value,
    Partial(usize),
    Laplacian,
}

/// Which operator pair the matrices discretize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    /// `L = div`, `B = ν·` (vector-valued unknowns).
    Divergence,
    /// `L = Δ`, `B = ∂ν` (scalar unknowns).
    Laplacian,
}

impl Operator {
    pub fn name(self) -> &'static str {
        match self {
            Operator::Divergence => "divergence",
            Operator::Laplacian => "laplacian",
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Operator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "divergence" | "div" => Ok(Operator::Divergence),
            "laplacian" | "elliptic" => Ok(Operator::Laplacian),
            _ => Err(Error::Parse(format!("unknown operator `{s}`"))),
        }
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Dimension of the polynomials of total degree below `order` in `d` variables.
pub fn poly_dim(order: usize, d: usize) -> usize {
    if order == 0 {
        0
    } else {
        binomial(order - 1 + d, d)
    }
}

/// Exponents of the monomials of total degree below `order`, by degree.
pub fn monomials(order: usize, d: usize) -> Vec<[u32; 3]> {
    let mut out = Vec::with_capacity(poly_dim(order, d));
    for deg in 0..order as u32 {
        for a in (0..=deg).rev() {
            if d == 1 {
                if a == deg {
                    out.push([a, 0, 0]);
                }
                continue;
            }
            for b in (0..=deg - a).rev() {
                let c = deg - a - b;
                if d == 2 && c != 0 {
                    continue;
                }
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// Stencil sizes for polynomial order `q` in dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StencilSpec {
    pub q: usize,
    pub d: usize,
    /// Neighbors for derivative rows, `2·C(q−1+d, d)`.
    pub n_l: usize,
    /// Neighbors for boundary rows, `2·C(q−2+d, d)`.
    pub n_b: usize,
}

impl StencilSpec {
    pub fn new(q: usize, d: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::structural(format!("polynomial order must be at least 2, got {q}")));
        }
        if !(1..=3).contains(&d) {
            return Err(Error::structural(format!("dimension must be 1, 2 or 3, got {d}")));
        }
        Ok(Self { q, d, n_l: 2 * poly_dim(q, d), n_b: 2 * poly_dim(q - 1, d) })
    }
}

fn powi_u(x: f64, e: u32) -> f64 {
    x.powi(e as i32)
}

fn kernel_functional(f: Functional, xi: &[f64; 3], p: i32, d: usize) -> f64 {
    // evaluates λ applied to x ↦ ‖x − ξ‖^p at x = 0
    let r = (0..d).map(|k| xi[k] * xi[k]).sum::<f64>().sqrt();
    match f {
        Functional::Value => r.powi(p),
        Functional::Partial(k) => {
            if r == 0.0 {
                0.0
            } else {
                -(p as f64) * r.powi(p - 2) * xi[k]
            }
        }
        Functional::Laplacian => {
            if r == 0.0 {
                0.0
            } else {
                (p as f64) * ((p + d as i32 - 2) as f64) * r.powi(p - 2)
            }
        }
    }
}

fn monomial_functional(f: Functional, a: &[u32; 3]) -> f64 {
    match f {
        Functional::Value => (a.iter().sum::<u32>() == 0) as u8 as f64,
        Functional::Partial(k) => {
            let mut e = [0; 3];
            e[k] = 1;
            (*a == e) as u8 as f64
        }
        Functional::Laplacian => (0..3)
            .any(|k| {
                let mut e = [0; 3];
                e[k] = 2;
                *a == e
            })
            .then_some(2.0)
            .unwrap_or(0.0),
    }
}

/// Weights of `functionals` at `center` on `stencil` (one vector per
/// functional), for kernel power `2·order − 1` and polynomials of total
/// degree below `order`. `None` when the saddle matrix is singular.
pub fn polyharmonic_weights_multi(
    center: Point,
    stencil: &[Point],
    functionals: &[Functional],
    order: usize,
    d: usize,
) -> Option<Vec<Vec<f64>>> {
    let n = stencil.len();
    let mons = monomials(order, d);
    let m = mons.len();
    if n < m {
        return None;
    }
    let p = 2 * order as i32 - 1;
    let rho = stencil
        .iter()
        .map(|x| (0..d).map(|k| (x[k] - center[k]).powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let rho = if rho > 0.0 { rho } else { 1.0 };
    let xi: Vec<[f64; 3]> = stencil
        .iter()
        .map(|x| {
            let mut s = [0.0; 3];
            for k in 0..d {
                s[k] = (x[k] - center[k]) / rho;
            }
            s
        })
        .collect();
    let dim = n + m;
    let mut a = vec![0.0; dim * dim];
    for i in 0..n {
        for j in 0..i {
            let r = (0..d).map(|k| (xi[i][k] - xi[j][k]).powi(2)).sum::<f64>().sqrt();
            a[i * dim + j] = r.powi(p);
        }
        for (c, e) in mons.iter().enumerate() {
            a[(n + c) * dim + i] = (0..d).map(|k| powi_u(xi[i][k], e[k])).product();
        }
    }
    let f = LdlFactor::new(a, dim)?;
    Some(
        functionals
            .iter()
            .map(|&fun| {
                let mut rhs = Vec::with_capacity(dim);
                rhs.extend(xi.iter().map(|x| kernel_functional(fun, x, p, d)));
                rhs.extend(mons.iter().map(|e| monomial_functional(fun, e)));
                let s = match fun {
                    Functional::Value => 1.0,
                    Functional::Partial(_) => 1.0 / rho,
                    Functional::Laplacian => 1.0 / (rho * rho),
                };
                f.solve(&rhs)[..n].iter().map(|w| w * s).collect()
            })
            .collect(),
    )
}

/// Weights of one functional; see [`polyharmonic_weights_multi`].
pub fn polyharmonic_weights(
    center: Point,
    stencil: &[Point],
    functional: Functional,
    order: usize,
    d: usize,
) -> Option<Vec<f64>> {
    polyharmonic_weights_multi(center, stencil, &[functional], order, d).map(|mut v| v.remove(0))
}

type RowEntries = Vec<(usize, f64)>;

fn assemble_rows<F>(nrows: usize, ncols: usize, row: F) -> Result<SparseMatrix>
where
    F: Fn(usize) -> Result<RowEntries> + Sync + Send,
{
    let rows = par::map_range(nrows, row);
    let mut t = TripletMatrix::with_capacity(nrows, ncols, rows.iter().map(|r| r.as_ref().map_or(0, Vec::len)).sum());
    for (i, r) in rows.into_iter().enumerate() {
        for (j, v) in r? {
            t.push(i, j, v);
        }
    }
    t.finalize()
}

fn stencil_points(x: &NeighborIndex, ids: &[usize]) -> Vec<Point> {
    ids.iter().map(|&j| x.point(j)).collect()
}

fn check_size(x: &NeighborIndex, k: usize) -> Result<()> {
    if k > x.len() {
        Err(Error::StencilTooLarge { stencil: k, available: x.len() })
    } else {
        Ok(())
    }
}

/// Divergence matrix `L = [L_1 … L_d]` of shape `N_Y × d·N_X`: row `i`
/// holds, in column block `k`, the `∂x_k` weights at `y_i` on its `n_L`
/// nearest nodes of `X`.
pub fn assemble_l_div(x: &NeighborIndex, y: &[Point], spec: &StencilSpec) -> Result<SparseMatrix> {
    check_size(x, spec.n_l)?;
    let (d, nx) = (spec.d, x.len());
    let fun: Vec<Functional> = (0..d).map(Functional::Partial).collect();
    assemble_rows(y.len(), d * nx, |i| {
        let ids = x.knn(y[i], spec.n_l)?;
        let w = polyharmonic_weights_multi(y[i], &stencil_points(x, &ids), &fun, spec.q, d)
            .ok_or(Error::DeficientStencil { node: i })?;
        Ok((0..d).flat_map(|k| ids.iter().zip(&w[k]).map(move |(&j, &v)| (k * nx + j, v))).collect())
    })
}

/// Normal-trace matrix `B = [D_1 B̃ … D_d B̃]` of shape `N_Z × d·N_X`,
/// where `B̃` holds value weights of order `q − 1` on the `n_B` nearest
/// nodes and `D_k = diag(ν_k)`.
pub fn assemble_b_normal(x: &NeighborIndex, z: &[Point], normals: &[Point], spec: &StencilSpec) -> Result<SparseMatrix> {
    check_size(x, spec.n_b)?;
    if z.len() != normals.len() {
        return Err(Error::structural("boundary nodes and normals differ in count"));
    }
    let (d, nx) = (spec.d, x.len());
    assemble_rows(z.len(), d * nx, |i| {
        let ids = x.knn(z[i], spec.n_b)?;
        let w = polyharmonic_weights(z[i], &stencil_points(x, &ids), Functional::Value, spec.q - 1, d)
            .ok_or(Error::DeficientStencil { node: i })?;
        let nu = normals[i];
        Ok((0..d).flat_map(|k| ids.iter().zip(&w).map(move |(&j, &v)| (k * nx + j, nu[k] * v))).collect())
    })
}

/// Laplacian matrix of shape `N_Y × N_X` with order-`q` weights on `n_L`
/// nearest nodes.
pub fn assemble_l_laplacian(x: &NeighborIndex, y: &[Point], spec: &StencilSpec) -> Result<SparseMatrix> {
    check_size(x, spec.n_l)?;
    assemble_rows(y.len(), x.len(), |i| {
        let ids = x.knn(y[i], spec.n_l)?;
        let w = polyharmonic_weights(y[i], &stencil_points(x, &ids), Functional::Laplacian, spec.q, spec.d)
            .ok_or(Error::DeficientStencil { node: i })?;
        Ok(ids.into_iter().zip(w).collect())
    })
}

/// Normal-derivative matrix of shape `N_Z × N_X`: `Σ_k ν_k ∂x_k` weights of
/// order `q − 1` on `n_B` nearest nodes.
pub fn assemble_b_dnu(x: &NeighborIndex, z: &[Point], normals: &[Point], spec: &StencilSpec) -> Result<SparseMatrix> {
    check_size(x, spec.n_b)?;
    if z.len() != normals.len() {
        return Err(Error::structural("boundary nodes and normals differ in count"));
    }
    let d = spec.d;
    let fun: Vec<Functional> = (0..d).map(Functional::Partial).collect();
    assemble_rows(z.len(), x.len(), |i| {
        let ids = x.knn(z[i], spec.n_b)?;
        let w = polyharmonic_weights_multi(z[i], &stencil_points(x, &ids), &fun, spec.q - 1, d)
            .ok_or(Error::DeficientStencil { node: i })?;
        Ok(ids
            .iter()
            .enumerate()
            .map(|(s, &j)| (j, (0..d).map(|k| normals[i][k] * w[k][s]).sum()))
            .collect())
    })
}

/// Both matrices for `op` on discretization nodes `x`.
pub fn assemble(
    op: Operator,
    x: &NeighborIndex,
    y: &[Point],
    z: &[Point],
    normals: &[Point],
    spec: &StencilSpec,
) -> Result<(SparseMatrix, SparseMatrix)> {
    match op {
        Operator::Divergence => Ok((assemble_l_div(x, y, spec)?, assemble_b_normal(x, z, normals, spec)?)),
        Operator::Laplacian => Ok((assemble_l_laplacian(x, y, spec)?, assemble_b_dnu(x, z, normals, spec)?)),
    }
}

/// Samples a vector field on `X` in component-major order.
pub fn discretize_field(x: &[Point], d: usize, f: impl Fn(Point) -> Point) -> Vec<f64> {
    let vals: Vec<Point> = x.iter().map(|&p| f(p)).collect();
    (0..d).flat_map(|k| vals.iter().map(move |v| v[k])).collect()
}
