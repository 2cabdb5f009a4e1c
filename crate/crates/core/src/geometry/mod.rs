//! Integration domains described by a level set `φ < 0`, optionally with
//! closed-form parametrizations of the boundary pieces.

mod builtin;
mod patch;

pub use builtin::Builtin;
pub use patch::{cassini_radius, ParametricPatch, PatchMap};

use crate::error::{Error, Result};

/// Points are stored with three coordinates; 2D domains keep `z = 0`.
pub type Point = [f64; 3];

pub(crate) fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: Point, b: Point) -> Point {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

/// Axis-aligned box; unused trailing axes of 2D boxes are `[0, 0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub lo: Point,
    pub hi: Point,
}

impl BoundingBox {
    /// Enlarges every used axis by `frac` of its length on both sides.
    pub fn padded(&self, frac: f64, dim: usize) -> Self {
        let mut b = *self;
        for k in 0..dim {
            let pad = frac * (self.hi[k] - self.lo[k]);
            b.lo[k] -= pad;
            b.hi[k] += pad;
        }
        b
    }

    pub fn side(&self, k: usize) -> f64 {
        self.hi[k] - self.lo[k]
    }

    pub fn measure(&self, dim: usize) -> f64 {
        (0..dim).map(|k| self.side(k)).product()
    }

    pub fn contains(&self, p: Point, dim: usize) -> bool {
        (0..dim).all(|k| p[k] >= self.lo[k] && p[k] <= self.hi[k])
    }

    /// Corner points of the box in the used dimensions.
    pub fn corners(&self, dim: usize) -> Vec<Point> {
        (0..1usize << dim)
            .map(|mask| {
                let mut p = [0.0; 3];
                for k in 0..dim {
                    p[k] = if mask >> k & 1 == 1 { self.hi[k] } else { self.lo[k] };
                }
                p
            })
            .collect()
    }
}

/// Level-set functions of the built-in domains.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Shape {
    Ellipse { a: f64, b: f64 },
    DiskSector,
    Cassini { a: f64, b: f64 },
    Ellipsoid { axes: [f64; 3] },
    LShape { half: [f64; 3] },
    Torus { major: f64, minor: f64 },
    DecoTetrahedron { scale: f64, level: f64 },
}

fn deco_quartic(p: Point) -> f64 {
    let [x, y, z] = p;
    let q = |t: f64| (t - 2.0).powi(2) * (t + 2.0).powi(2);
    q(x) + q(y) + q(z) + 3.0 * (x * x * y * y + y * y * z * z + z * z * x * x) + 6.0 * x * y * z
        - 10.0 * (x * x + y * y + z * z)
}

fn deco_quartic_grad(p: Point) -> Point {
    let [x, y, z] = p;
    [
        4.0 * x * (x * x - 4.0) + 6.0 * x * (y * y + z * z) + 6.0 * y * z - 20.0 * x,
        4.0 * y * (y * y - 4.0) + 6.0 * y * (z * z + x * x) + 6.0 * z * x - 20.0 * y,
        4.0 * z * (z * z - 4.0) + 6.0 * z * (x * x + y * y) + 6.0 * x * y - 20.0 * z,
    ]
}

/// Value and gradient of `max(|x|−hx, |y|−hy, |z|−hz, min(x, −y))`.
fn lshape(p: Point, half: [f64; 3]) -> (f64, Point) {
    let mut best = (f64::NEG_INFINITY, [0.0; 3]);
    for k in 0..3 {
        let v = p[k].abs() - half[k];
        if v > best.0 {
            let mut g = [0.0; 3];
            g[k] = if p[k] >= 0.0 { 1.0 } else { -1.0 };
            best = (v, g);
        }
    }
    let cut = if p[0] <= -p[1] { (p[0], [1.0, 0.0, 0.0]) } else { (-p[1], [0.0, -1.0, 0.0]) };
    if cut.0 > best.0 {
        best = cut;
    }
    best
}

impl Shape {
    fn eval(&self, p: Point) -> (f64, Point) {
        match *self {
            Shape::Ellipse { a, b } => {
                let v = p[0] * p[0] / (a * a) + p[1] * p[1] / (b * b) - 1.0;
                (v, [2.0 * p[0] / (a * a), 2.0 * p[1] / (b * b), 0.0])
            }
            Shape::DiskSector => {
                let r = p[0].hypot(p[1]);
                let radial = (r - 1.0, if r > 0.0 { [p[0] / r, p[1] / r, 0.0] } else { [1.0, 0.0, 0.0] });
                let cut = if p[0] <= -p[1] { (p[0], [1.0, 0.0, 0.0]) } else { (-p[1], [0.0, -1.0, 0.0]) };
                if radial.0 >= cut.0 {
                    radial
                } else {
                    cut
                }
            }
            Shape::Cassini { a, b } => {
                let [x, y, _] = p;
                let pp = (x + a).powi(2) + y * y;
                let qq = (x - a).powi(2) + y * y;
                let v = pp * qq - b.powi(4);
                (v, [2.0 * (x + a) * qq + 2.0 * (x - a) * pp, 2.0 * y * (pp + qq), 0.0])
            }
            Shape::Ellipsoid { axes } => {
                let v = (0..3).map(|k| p[k] * p[k] / (axes[k] * axes[k])).sum::<f64>() - 1.0;
                (v, [2.0 * p[0] / (axes[0] * axes[0]), 2.0 * p[1] / (axes[1] * axes[1]), 2.0 * p[2] / (axes[2] * axes[2])])
            }
            Shape::LShape { half } => lshape(p, half),
            Shape::Torus { major, minor } => {
                let rho = p[0].hypot(p[1]);
                let d = rho - major;
                let v = d * d + p[2] * p[2] - minor * minor;
                let g = if rho > 0.0 {
                    [2.0 * d * p[0] / rho, 2.0 * d * p[1] / rho, 2.0 * p[2]]
                } else {
                    [0.0, 0.0, 2.0 * p[2]]
                };
                (v, g)
            }
            Shape::DecoTetrahedron { scale: s, level } => {
                // sqrt(ψ(s x) + 100) − sqrt(100 − level) has the same zero set
                // as ψ(s x) + level but is not a polynomial
                let q = scale(p, s);
                let root = (deco_quartic(q) + 100.0).sqrt();
                let v = root - (100.0 - level).sqrt();
                (v, scale(deco_quartic_grad(q), s / (2.0 * root)))
            }
        }
    }
}

/// Implicit description `Ω = {φ < 0}` with a bounding box of the closure.
#[derive(Debug, Clone)]
pub struct ImplicitDomain {
    pub(crate) dim: usize,
    pub(crate) shape: Shape,
    /// Tight box of the closure before padding.
    pub(crate) tight_box: BoundingBox,
}

/// Fraction of each side added to the tight box on both ends.
pub const BOX_PADDING: f64 = 0.1;

impl ImplicitDomain {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn phi(&self, p: Point) -> f64 {
        self.shape.eval(p).0
    }

    pub fn grad_phi(&self, p: Point) -> Point {
        self.shape.eval(p).1
    }

    pub fn phi_and_grad(&self, p: Point) -> (f64, Point) {
        self.shape.eval(p)
    }

    /// Tight box padded by [`BOX_PADDING`] per side; strictly contains the
    /// closure of the domain.
    pub fn bounding_box(&self) -> BoundingBox {
        self.tight_box.padded(BOX_PADDING, self.dim)
    }

    pub fn tight_box(&self) -> BoundingBox {
        self.tight_box
    }

    /// First-order distance estimate `|φ| / |∇φ|`.
    pub fn distance_estimate(&self, p: Point) -> f64 {
        let (v, g) = self.phi_and_grad(p);
        let gn = norm(g);
        if gn > 0.0 {
            v.abs() / gn
        } else {
            f64::INFINITY
        }
    }
}

/// Point or segment on the boundary where the normal is not defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Locus {
    pub a: Point,
    pub b: Point,
}

impl Locus {
    pub fn distance(&self, p: Point) -> f64 {
        let d = sub(self.b, self.a);
        let dd = dot(d, d);
        let s = if dd > 0.0 { (dot(sub(p, self.a), d) / dd).clamp(0.0, 1.0) } else { 0.0 };
        dist(p, add(self.a, scale(d, s)))
    }
}

/// Width of the band around corners and edges inside which normals are
/// taken from patch data instead of the level-set gradient.
pub const CORNER_BAND: f64 = 1e-9;

/// A complete integration domain.
#[derive(Debug, Clone)]
pub struct DomainModel {
    pub(crate) builtin: Builtin,
    pub(crate) implicit: ImplicitDomain,
    pub(crate) patches: Vec<ParametricPatch>,
    pub(crate) measure_interior: Option<f64>,
    pub(crate) measure_boundary: Option<f64>,
    pub(crate) interior_witness: Point,
    pub(crate) fundamental_center: Point,
    /// Guaranteed distance from `fundamental_center` to the boundary.
    pub(crate) clearance: f64,
    pub(crate) loci: Vec<Locus>,
}

impl DomainModel {
    pub fn builtin(&self) -> Builtin {
        self.builtin
    }

    pub fn name(&self) -> &'static str {
        self.builtin.name()
    }

    pub fn dim(&self) -> usize {
        self.implicit.dim
    }

    pub fn implicit(&self) -> &ImplicitDomain {
        &self.implicit
    }

    pub fn patches(&self) -> &[ParametricPatch] {
        &self.patches
    }

    pub fn measure_interior(&self) -> Option<f64> {
        self.measure_interior
    }

    pub fn measure_boundary(&self) -> Option<f64> {
        self.measure_boundary
    }

    pub fn interior_witness(&self) -> Point {
        self.interior_witness
    }

    pub fn fundamental_center(&self) -> Point {
        self.fundamental_center
    }

    pub fn clearance(&self) -> f64 {
        self.clearance
    }

    pub fn loci(&self) -> &[Locus] {
        &self.loci
    }

    pub fn bounding_box(&self) -> BoundingBox {
        self.implicit.bounding_box()
    }

    pub fn phi(&self, p: Point) -> f64 {
        self.implicit.phi(p)
    }

    pub fn inside(&self, p: Point) -> bool {
        self.implicit.phi(p) < 0.0
    }

    pub fn near_locus(&self, p: Point) -> bool {
        self.loci.iter().any(|l| l.distance(p) <= CORNER_BAND)
    }

    /// Projects `p` onto `φ = 0` by damped Newton steps along `∇φ`.
    ///
    /// Returns `None` if the gradient vanishes or `|φ| ≤ 1e-12 (1 + |p|)`
    /// is not reached within 50 iterations.
    pub fn project_to_boundary(&self, p: Point) -> Option<Point> {
        const MAX_ITERS: usize = 50;
        let tol = 1e-12 * (1.0 + norm(p));
        let mut x = p;
        let (mut v, mut g) = self.implicit.phi_and_grad(x);
        for _ in 0..MAX_ITERS {
            if v.abs() <= tol {
                return Some(x);
            }
            let gg = dot(g, g);
            if !(gg > 0.0) {
                return None;
            }
            let step = scale(g, -v / gg);
            let mut t = 1.0;
            loop {
                let cand = add(x, scale(step, t));
                let (cv, cg) = self.implicit.phi_and_grad(cand);
                if cv.abs() < v.abs() || t < 1e-3 {
                    x = cand;
                    v = cv;
                    g = cg;
                    break;
                }
                t *= 0.5;
            }
        }
        (v.abs() <= tol).then_some(x)
    }

    /// Unit outward normal `∇φ/|∇φ|` at a boundary point.
    ///
    /// Fails on tagged corners and edges, where the caller must use patch
    /// normals instead.
    pub fn boundary_normal(&self, p: Point) -> Result<Point> {
        if self.near_locus(p) {
            return Err(Error::Geometry(format!("{p:?} lies on a corner or edge; use a patch normal")));
        }
        let g = self.implicit.grad_phi(p);
        let n = norm(g);
        if !(n > 0.0) {
            return Err(Error::Geometry(format!("level-set gradient vanishes at {p:?}")));
        }
        Ok(scale(g, 1.0 / n))
    }

    /// Normal for any boundary point: the gradient normal away from
    /// corners, otherwise the normal of the first flat patch through `p`.
    pub fn normal_at(&self, p: Point) -> Result<Point> {
        match self.boundary_normal(p) {
            Ok(n) => Ok(n),
            Err(e) => self
                .patches
                .iter()
                .find(|pt| pt.contains_flat(p, 1e-8))
                .map(|pt| pt.normal(&[0.0, 0.0]))
                .ok_or(e),
        }
    }
}
