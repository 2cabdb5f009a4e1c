//! Weight computation: assembles `A = [Lᵀ, −Bᵀ; f̂ᵀ, −ĝᵀ]`, solves for the
//! minimum-norm `(w, v)` and reports stability diagnostics.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::bspline::{self, KNOT_SPACING_RATIO};
use crate::error::{Error, Result};
use crate::geometry::{dot, norm, sub, DomainModel, Point};
use crate::mfd::{self, Operator, StencilSpec};
use crate::nodegen::{make_x, NeighborIndex, NodeSet, X_SPACING_RATIO};
use crate::sparse::{
    least_squares_residual, prune_zero_rows, solve_min_norm_chol, solve_min_norm_qr, SolverPath, SparseMatrix,
    TripletMatrix,
};

/// Discretization of the divergence and normal trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Polyharmonic meshless finite differences on an auxiliary node set.
    Mfd,
    /// Collocation of a uniform tensor-product spline space.
    Bsp,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Mfd => "mfd",
            Method::Bsp => "bsp",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mfd" => Ok(Method::Mfd),
            "bsp" => Ok(Method::Bsp),
            _ => Err(Error::Parse(format!("unknown method `{s}`"))),
        }
    }
}

/// The non-homogeneous constraint pair `(f̂, ĝ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    /// `(0, 1)`: the boundary weights sum to `|∂Ω|`.
    BoundaryConstant,
    /// `(1, 0)`: the interior weights sum to `|Ω|`.
    InteriorConstant,
    /// `(1, −1)`: `Σw + Σv = |Ω| + |∂Ω|`.
    Combined,
    /// `(0, ∂νΦ(·, x0))` with `x0` interior; needs no measure.
    FundamentalSolution,
    /// Both `(1, 0)` and `(0, 1)`, one row each.
    Both,
}

impl ConstraintKind {
    pub const ALL: [ConstraintKind; 5] = [
        ConstraintKind::BoundaryConstant,
        ConstraintKind::InteriorConstant,
        ConstraintKind::Combined,
        ConstraintKind::FundamentalSolution,
        ConstraintKind::Both,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConstraintKind::BoundaryConstant => "boundary",
            ConstraintKind::InteriorConstant => "interior",
            ConstraintKind::Combined => "combined",
            ConstraintKind::FundamentalSolution => "fundamental",
            ConstraintKind::Both => "both",
        }
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConstraintKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConstraintKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown constraint `{s}`")))
    }
}

/// Normal derivative of the fundamental solution of the Laplacian,
/// `νᵀ(z − x0) / (d ω_d ‖z − x0‖^d)` with `ω_2 = π`, `ω_3 = 4π/3`.
pub fn fundamental_ghat(dim: usize, x0: Point, z: Point, nu: Point) -> Result<f64> {
    let r = sub(z, x0);
    let rn = norm(r);
    if rn == 0.0 {
        return Err(Error::data("evaluation point coincides with the source point"));
    }
    let d_omega = match dim {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => return Err(Error::structural(format!("dimension {dim} is not 2 or 3"))),
    };
    Ok(dot(nu, r) / (d_omega * rn.powi(dim as i32)))
}

/// One constraint row: coefficients over `Y` and over `Z` (already
/// carrying the sign of the `Z` block) and the right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintRow {
    pub over_y: Vec<f64>,
    pub over_z: Vec<f64>,
    pub rhs: f64,
}

/// A validated constraint for a particular domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSpec {
    pub kind: ConstraintKind,
    pub x0: Option<Point>,
    measure_interior: Option<f64>,
    measure_boundary: Option<f64>,
}

impl ConstraintSpec {
    pub fn new(kind: ConstraintKind, d: &DomainModel) -> Result<Self> {
        let need_int = matches!(kind, ConstraintKind::InteriorConstant | ConstraintKind::Combined | ConstraintKind::Both);
        let need_bnd = matches!(kind, ConstraintKind::BoundaryConstant | ConstraintKind::Combined | ConstraintKind::Both);
        if need_int && d.measure_interior().is_none() {
            return Err(Error::UnknownMeasure("interior"));
        }
        if need_bnd && d.measure_boundary().is_none() {
            return Err(Error::UnknownMeasure("boundary"));
        }
        let x0 = (kind == ConstraintKind::FundamentalSolution).then(|| d.fundamental_center());
        if let Some(x0) = x0 {
            if !d.inside(x0) {
                return Err(Error::Geometry(format!("source point {x0:?} is not interior")));
            }
        }
        Ok(Self { kind, x0, measure_interior: d.measure_interior(), measure_boundary: d.measure_boundary() })
    }

    /// Constraint rows for nodes `y` and boundary nodes `z` with normals.
    pub fn rows(&self, dim: usize, y: &[Point], z: &[Point], normals: &[Point]) -> Result<Vec<ConstraintRow>> {
        let (ny, nz) = (y.len(), z.len());
        let interior = || ConstraintRow {
            over_y: vec![1.0; ny],
            over_z: vec![0.0; nz],
            rhs: self.measure_interior.expect("checked at construction"),
        };
        let boundary = |sign: f64| ConstraintRow {
            over_y: vec![0.0; ny],
            over_z: vec![sign; nz],
            rhs: sign * self.measure_boundary.expect("checked at construction"),
        };
        let rows = match self.kind {
            ConstraintKind::BoundaryConstant => vec![boundary(1.0)],
            ConstraintKind::InteriorConstant => vec![interior()],
            ConstraintKind::Combined => vec![ConstraintRow {
                over_y: vec![1.0; ny],
                over_z: vec![1.0; nz],
                rhs: self.measure_interior.expect("checked") + self.measure_boundary.expect("checked"),
            }],
            ConstraintKind::Both => vec![interior(), boundary(-1.0)],
            ConstraintKind::FundamentalSolution => {
                let x0 = self.x0.expect("set for this kind");
                let over_z = z
                    .iter()
                    .zip(normals)
                    .map(|(&zi, &ni)| fundamental_ghat(dim, x0, zi, ni).map(|g| -g))
                    .collect::<Result<Vec<_>>>()?;
                vec![ConstraintRow { over_y: vec![0.0; ny], over_z, rhs: -1.0 }]
            }
        };
        for r in &rows {
            if r.over_y.iter().chain(&r.over_z).all(|&v| v == 0.0) {
                return Err(Error::structural(format!("constraint `{}` gives an all-zero row", self.kind)));
            }
        }
        Ok(rows)
    }
}

/// `A = [Lᵀ, −Bᵀ]` with the constraint rows appended, and `b`. Rows of
/// `A` without entries are removed; the second element reports how many.
pub fn build_system(l: &SparseMatrix, b: &SparseMatrix, rows: &[ConstraintRow]) -> Result<(SparseMatrix, Vec<f64>, usize)> {
    if l.ncols() != b.ncols() {
        return Err(Error::structural(format!("L has {} columns but B has {}", l.ncols(), b.ncols())));
    }
    let (ny, nz, nc) = (l.nrows(), b.nrows(), l.ncols());
    let mut t = TripletMatrix::with_capacity(nc + rows.len(), ny + nz, l.nnz() + b.nnz() + rows.len() * (ny + nz));
    for (i, j, v) in l.iter() {
        t.push(j, i, v);
    }
    for (i, j, v) in b.iter() {
        t.push(j, ny + i, -v);
    }
    let mut rhs = vec![0.0; nc];
    for (k, r) in rows.iter().enumerate() {
        if r.over_y.len() != ny || r.over_z.len() != nz {
            return Err(Error::structural("constraint row does not match the node counts"));
        }
        for (j, &v) in r.over_y.iter().chain(&r.over_z).enumerate() {
            t.push(nc + k, j, v);
        }
        rhs.push(r.rhs);
    }
    let a = t.finalize()?;
    let (a, map) = prune_zero_rows(&a);
    let rhs: Vec<f64> = map.kept.iter().map(|&i| rhs[i]).collect();
    Ok((a, rhs, map.removed.len()))
}

/// Which minimum-norm solver to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SolverChoice {
    /// Regularized normal equations for 3D spline systems, QR otherwise.
    #[default]
    Auto,
    Qr,
    Cholesky,
}

impl FromStr for SolverChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(SolverChoice::Auto),
            "qr" => Ok(SolverChoice::Qr),
            "cholesky" | "chol" => Ok(SolverChoice::Cholesky),
            _ => Err(Error::Parse(format!("unknown solver `{s}`"))),
        }
    }
}

impl fmt::Display for SolverChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverChoice::Auto => "auto",
            SolverChoice::Qr => "qr",
            SolverChoice::Cholesky => "cholesky",
        })
    }
}

/// Default relative rank tolerance of the QR path.
pub fn default_rank_tol(dim: usize) -> f64 {
    if dim == 2 {
        1e-15
    } else {
        1e-12
    }
}

/// Parameters of [`compute_weights`].
#[derive(Debug, Clone)]
pub struct QuadratureOptions {
    pub method: Method,
    pub q: usize,
    pub constraint: ConstraintKind,
    pub solver: SolverChoice,
    /// Overrides [`default_rank_tol`].
    pub rank_tol: Option<f64>,
    pub operator: Operator,
    /// Discretization nodes for MFD; generated at `1.6 h` when absent
    /// (or taken equal to `Y` for the Laplacian operator).
    pub x_nodes: Option<Vec<Point>>,
    pub x_ratio: f64,
    pub knot_ratio: f64,
}

impl QuadratureOptions {
    pub fn new(method: Method, q: usize, constraint: ConstraintKind) -> Self {
        Self {
            method,
            q,
            constraint,
            solver: SolverChoice::Auto,
            rank_tol: None,
            operator: Operator::Divergence,
            x_nodes: None,
            x_ratio: X_SPACING_RATIO,
            knot_ratio: KNOT_SPACING_RATIO,
        }
    }
}

/// Weights `w` over `Y` and `v` over `Z`, with diagnostics.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub dim: usize,
    pub y: Vec<Point>,
    pub z: Vec<Point>,
    pub w: Vec<f64>,
    pub v: Vec<f64>,
    /// `‖w‖₁ / |Ω|`, or `‖w‖₁` when the volume is unknown.
    pub k_w: f64,
    pub k_w_normalized: bool,
    /// `‖v‖₁ / |∂Ω|`, or `‖v‖₁` when the boundary measure is unknown.
    pub k_v: f64,
    pub k_v_normalized: bool,
    pub residual_inf: f64,
    pub method: Method,
    pub q: usize,
    pub h: f64,
    pub seed: u64,
    pub constraint: ConstraintKind,
    pub solver_path: SolverPath,
    pub numeric_rank: Option<usize>,
    pub omega: f64,
    /// Shape of `A` after removal of empty rows.
    pub system_shape: (usize, usize),
    pub pruned_rows: usize,
}

/// The matrices `L`, `B` for `nodes` and the chosen method.
pub fn assemble_operators(d: &DomainModel, nodes: &NodeSet, opts: &QuadratureOptions) -> Result<(SparseMatrix, SparseMatrix)> {
    let dim = d.dim();
    let y = nodes.y();
    match opts.method {
        Method::Mfd => {
            let x = match (&opts.x_nodes, opts.operator) {
                (Some(x), _) => x.clone(),
                (None, Operator::Laplacian) => y.clone(),
                (None, Operator::Divergence) => make_x(d, nodes.h, nodes.seed, opts.x_ratio)?.all_points(),
            };
            let spec = StencilSpec::new(opts.q, dim)?;
            if spec.n_l > x.len() {
                return Err(Error::StencilTooLarge { stencil: spec.n_l, available: x.len() });
            }
            let idx = NeighborIndex::new(x, dim);
            mfd::assemble(opts.operator, &idx, &y, &nodes.boundary, &nodes.normals, &spec)
        }
        Method::Bsp => {
            if opts.operator != Operator::Divergence {
                return Err(Error::structural("the spline method supports only the divergence operator"));
            }
            let space = bspline::make_space(d, nodes.h, opts.q, opts.knot_ratio)?;
            Ok((
                bspline::assemble_l_div_bsp(&space, &y)?,
                bspline::assemble_b_normal_bsp(&space, &nodes.boundary, &nodes.normals)?,
            ))
        }
    }
}

/// Computes quadrature weights for `nodes` on `d`.
pub fn compute_weights(d: &DomainModel, nodes: &NodeSet, opts: &QuadratureOptions) -> Result<QuadratureRule> {
    let dim = d.dim();
    if nodes.dim != dim {
        return Err(Error::structural("node set and domain dimensions differ"));
    }
    let constraint = ConstraintSpec::new(opts.constraint, d)?;
    let (l, b) = assemble_operators(d, nodes, opts)?;
    let y = nodes.y();
    let rows = constraint.rows(dim, &y, &nodes.boundary, &nodes.normals)?;
    let (a, rhs, pruned) = build_system(&l, &b, &rows)?;
    if a.nrows() > a.ncols() {
        return Err(Error::Overdetermined { rows: a.nrows(), cols: a.ncols() });
    }
    let use_chol = match opts.solver {
        SolverChoice::Auto => opts.method == Method::Bsp && dim == 3,
        SolverChoice::Qr => false,
        SolverChoice::Cholesky => true,
    };
    let report = if use_chol {
        solve_min_norm_chol(&a, &rhs)?
    } else {
        solve_min_norm_qr(&a, &rhs, opts.rank_tol.unwrap_or_else(|| default_rank_tol(dim)))?
    };
    let ny = y.len();
    let mut x = report.solution;
    let v = x.split_off(ny);
    let w = x;
    let l1 = |s: &[f64]| s.iter().map(|t| t.abs()).sum::<f64>();
    let (k_w, k_w_normalized) = match d.measure_interior() {
        Some(m) => (l1(&w) / m, true),
        None => (l1(&w), false),
    };
    let (k_v, k_v_normalized) = match d.measure_boundary() {
        Some(m) => (l1(&v) / m, true),
        None => (l1(&v), false),
    };
    Ok(QuadratureRule {
        dim,
        y,
        z: nodes.boundary.clone(),
        w,
        v,
        k_w,
        k_w_normalized,
        k_v,
        k_v_normalized,
        residual_inf: report.residual_inf,
        method: opts.method,
        q: opts.q,
        h: nodes.h,
        seed: nodes.seed,
        constraint: opts.constraint,
        solver_path: report.solver_path,
        numeric_rank: report.numeric_rank,
        omega: report.regularization_omega,
        system_shape: (a.nrows(), a.ncols()),
        pruned_rows: pruned,
    })
}

impl QuadratureRule {
    /// `Σ w_i f_i − Σ v_i g_i`; a missing sample vector drops its term.
    pub fn apply(&self, f: Option<&[f64]>, g: Option<&[f64]>) -> Result<f64> {
        let mut s = 0.0;
        if let Some(f) = f {
            if f.len() != self.w.len() {
                return Err(Error::structural(format!("{} interior samples for {} nodes", f.len(), self.w.len())));
            }
            s += self.w.iter().zip(f).map(|(a, b)| a * b).sum::<f64>();
        }
        if let Some(g) = g {
            if g.len() != self.v.len() {
                return Err(Error::structural(format!("{} boundary samples for {} nodes", g.len(), self.v.len())));
            }
            s -= self.v.iter().zip(g).map(|(a, b)| a * b).sum::<f64>();
        }
        Ok(s)
    }

    /// `Σ w_i f(y_i)`.
    pub fn integrate_interior(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.w.iter().zip(&self.y).map(|(w, &p)| w * f(p)).sum()
    }

    /// `Σ v_i g(z_i)`.
    pub fn integrate_boundary(&self, g: impl Fn(Point) -> f64) -> f64 {
        self.v.iter().zip(&self.z).map(|(v, &p)| v * g(p)).sum()
    }

    /// Writes a `#` metadata line followed by `kind,x,y[,z],weight` rows.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(
            out,
            "# dim={} method={} q={} h={:.16e} seed={} constraint={} residual={:.6e} K_w={:.16e} K_v={:.16e}",
            self.dim, self.method, self.q, self.h, self.seed, self.constraint, self.residual_inf, self.k_w, self.k_v
        )?;
        let coords = |p: &Point| p[..self.dim].iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(",");
        for (p, w) in self.y.iter().zip(&self.w) {
            writeln!(out, "interior,{},{w:.16e}", coords(p))?;
        }
        for (p, v) in self.z.iter().zip(&self.v) {
            writeln!(out, "boundary,{},{v:.16e}", coords(p))?;
        }
        Ok(())
    }
}

/// Nodes and weights read back from a weight file.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    pub dim: usize,
    pub y: Vec<Point>,
    pub w: Vec<f64>,
    pub z: Vec<Point>,
    pub v: Vec<f64>,
}

impl WeightTable {
    pub fn read_csv(r: impl BufRead) -> Result<Self> {
        let mut t = WeightTable { dim: 0, y: Vec::new(), w: Vec::new(), z: Vec::new(), v: Vec::new() };
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{s}`")));
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if let Some(d) = meta.split_whitespace().find_map(|kv| kv.strip_prefix("dim=")) {
                    t.dim = d.parse().map_err(|_| Error::Parse(format!("bad dimension `{d}`")))?;
                }
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if t.dim == 0 {
                t.dim = f.len().saturating_sub(2);
            }
            if f.len() != t.dim + 2 || !(t.dim == 2 || t.dim == 3) {
                return Err(Error::Parse(format!("malformed weight row `{line}`")));
            }
            let mut p = [0.0; 3];
            for k in 0..t.dim {
                p[k] = num(f[1 + k])?;
            }
            let wt = num(f[t.dim + 1])?;
            match f[0] {
                "interior" => {
                    t.y.push(p);
                    t.w.push(wt);
                }
                "boundary" => {
                    t.z.push(p);
                    t.v.push(wt);
                }
                k => return Err(Error::Parse(format!("unknown node kind `{k}`"))),
            }
        }
        Ok(t)
    }
}

/// Whether `[L; B] c = (f̂|_Y, ĝ|_Z)` has no solution up to
/// `1e-8·‖(f̂, ĝ)‖∞`: the condition under which the constrained system
/// is expected to be consistent.
pub fn check_discrete_incompatibility(l: &SparseMatrix, b: &SparseMatrix, fhat: &[f64], ghat: &[f64]) -> Result<bool> {
    let m = l.vstack(b)?;
    let rhs: Vec<f64> = fhat.iter().chain(ghat).copied().collect();
    let scale = rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let res = least_squares_residual(&m, &rhs, 1e-13)?;
    Ok(res > 1e-8 * scale)
}
