//! Parametric boundary patches.

use std::f64::consts::PI;

use super::{add, cross, dot, norm, scale, sub, Point};

/// Closed-form parametrization of one smooth piece of the boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum PatchMap {
    /// `t ↦ (a cos t, b sin t)`.
    EllipseArc { a: f64, b: f64 },
    /// `t ↦ r (cos t, sin t)`.
    CircleArc { radius: f64 },
    /// `s ↦ p0 + s (p1 − p0)`, `s ∈ [0, 1]`.
    Segment { p0: Point, p1: Point, normal: Point },
    /// Cassini oval `|x − (a,0)|·|x + (a,0)| = b²` in polar form, `b > a`.
    CassiniArc { a: f64, b: f64 },
    /// `(θ, φ) ↦ (a sin θ cos φ, b sin θ sin φ, c cos θ)`.
    Ellipsoid { axes: [f64; 3] },
    /// `(u, v) ↦ ((R + r cos v) cos u, (R + r cos v) sin u, r sin v)`.
    Torus { major: f64, minor: f64 },
    /// `(s, t) ↦ origin + s e1 + t e2`, `(s, t) ∈ [0, 1]²`.
    Rectangle { origin: Point, e1: Point, e2: Point, normal: Point },
}

/// A boundary piece: a map on a parameter interval (2D domains) or
/// rectangle (3D domains).
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricPatch {
    pub map: PatchMap,
    /// Parameter bounds, one interval per parameter.
    pub param: Vec<[f64; 2]>,
}

impl ParametricPatch {
    pub fn new(map: PatchMap) -> Self {
        let param = match &map {
            PatchMap::EllipseArc { .. } | PatchMap::CassiniArc { .. } => vec![[0.0, 2.0 * PI]],
            PatchMap::CircleArc { .. } => vec![[0.0, 2.0 * PI]],
            PatchMap::Segment { .. } => vec![[0.0, 1.0]],
            PatchMap::Ellipsoid { .. } => vec![[0.0, PI], [0.0, 2.0 * PI]],
            PatchMap::Torus { .. } => vec![[0.0, 2.0 * PI], [0.0, 2.0 * PI]],
            PatchMap::Rectangle { .. } => vec![[0.0, 1.0], [0.0, 1.0]],
        };
        Self { map, param }
    }

    pub fn with_param(mut self, param: Vec<[f64; 2]>) -> Self {
        self.param = param;
        self
    }

    /// Number of parameters: 1 for curves, 2 for surfaces.
    pub fn param_dim(&self) -> usize {
        self.param.len()
    }

    /// Whether the first parameter wraps around (the curve or surface
    /// closes on itself along it).
    pub fn is_periodic(&self) -> bool {
        let [lo, hi] = self.param[0];
        match self.map {
            PatchMap::EllipseArc { .. } | PatchMap::CassiniArc { .. } | PatchMap::CircleArc { .. } => {
                (hi - lo - 2.0 * PI).abs() < 1e-14
            }
            PatchMap::Torus { .. } => true,
            _ => false,
        }
    }

    pub fn point(&self, s: &[f64]) -> Point {
        match self.map {
            PatchMap::EllipseArc { a, b } => [a * s[0].cos(), b * s[0].sin(), 0.0],
            PatchMap::CircleArc { radius } => [radius * s[0].cos(), radius * s[0].sin(), 0.0],
            PatchMap::Segment { p0, p1, .. } => add(p0, scale(sub(p1, p0), s[0])),
            PatchMap::CassiniArc { a, b } => {
                let r = cassini_radius(a, b, s[0]);
                [r * s[0].cos(), r * s[0].sin(), 0.0]
            }
            PatchMap::Ellipsoid { axes } => {
                let (st, ct) = s[0].sin_cos();
                let (sp, cp) = s[1].sin_cos();
                [axes[0] * st * cp, axes[1] * st * sp, axes[2] * ct]
            }
            PatchMap::Torus { major, minor } => {
                let (su, cu) = s[0].sin_cos();
                let (sv, cv) = s[1].sin_cos();
                let rho = major + minor * cv;
                [rho * cu, rho * su, minor * sv]
            }
            PatchMap::Rectangle { origin, e1, e2, .. } => add(origin, add(scale(e1, s[0]), scale(e2, s[1]))),
        }
    }

    /// Partial derivatives of the map with respect to each parameter.
    pub fn tangents(&self, s: &[f64]) -> Vec<Point> {
        match self.map {
            PatchMap::EllipseArc { a, b } => vec![[-a * s[0].sin(), b * s[0].cos(), 0.0]],
            PatchMap::CircleArc { radius } => vec![[-radius * s[0].sin(), radius * s[0].cos(), 0.0]],
            PatchMap::Segment { p0, p1, .. } => vec![sub(p1, p0)],
            PatchMap::CassiniArc { a, b } => {
                let t = s[0];
                let r = cassini_radius(a, b, t);
                let (s2, c2) = (2.0 * t).sin_cos();
                let root = (b.powi(4) - a.powi(4) * s2 * s2).sqrt();
                let dr2 = -2.0 * a * a * s2 - 2.0 * a.powi(4) * s2 * c2 / root;
                let dr = dr2 / (2.0 * r);
                let (st, ct) = t.sin_cos();
                vec![[dr * ct - r * st, dr * st + r * ct, 0.0]]
            }
            PatchMap::Ellipsoid { axes } => {
                let (st, ct) = s[0].sin_cos();
                let (sp, cp) = s[1].sin_cos();
                vec![
                    [axes[0] * ct * cp, axes[1] * ct * sp, -axes[2] * st],
                    [-axes[0] * st * sp, axes[1] * st * cp, 0.0],
                ]
            }
            PatchMap::Torus { major, minor } => {
                let (su, cu) = s[0].sin_cos();
                let (sv, cv) = s[1].sin_cos();
                let rho = major + minor * cv;
                vec![[-rho * su, rho * cu, 0.0], [-minor * sv * cu, -minor * sv * su, minor * cv]]
            }
            PatchMap::Rectangle { e1, e2, .. } => vec![e1, e2],
        }
    }

    /// Unit outward normal.
    pub fn normal(&self, s: &[f64]) -> Point {
        match self.map {
            PatchMap::Segment { normal, .. } | PatchMap::Rectangle { normal, .. } => normal,
            PatchMap::Ellipsoid { axes } => {
                let p = self.point(s);
                let g = [p[0] / (axes[0] * axes[0]), p[1] / (axes[1] * axes[1]), p[2] / (axes[2] * axes[2])];
                scale(g, 1.0 / norm(g))
            }
            PatchMap::Torus { .. } => {
                let (su, cu) = s[0].sin_cos();
                let (sv, cv) = s[1].sin_cos();
                [cv * cu, cv * su, sv]
            }
            _ => {
                // counter-clockwise curves: rotate the tangent clockwise
                let t = self.tangents(s)[0];
                let n = [t[1], -t[0], 0.0];
                scale(n, 1.0 / norm(n))
            }
        }
    }

    /// Length (curves) or area (surfaces) element `|∂x/∂s|` resp.
    /// `|∂x/∂s × ∂x/∂t|`.
    pub fn area_element(&self, s: &[f64]) -> f64 {
        let t = self.tangents(s);
        match t.len() {
            1 => norm(t[0]),
            _ => norm(cross(t[0], t[1])),
        }
    }

    /// Whether `p` lies on this patch within `tol`. Only flat patches
    /// (segments and rectangles) are tested; curved patches return false.
    pub fn contains_flat(&self, p: Point, tol: f64) -> bool {
        match self.map {
            PatchMap::Segment { p0, p1, .. } => {
                let d = sub(p1, p0);
                let s = (dot(sub(p, p0), d) / dot(d, d)).clamp(0.0, 1.0);
                norm(sub(p, add(p0, scale(d, s)))) <= tol
            }
            PatchMap::Rectangle { origin, e1, e2, normal } => {
                let q = sub(p, origin);
                if dot(q, normal).abs() > tol {
                    return false;
                }
                let s = dot(q, e1) / dot(e1, e1);
                let t = dot(q, e2) / dot(e2, e2);
                let (l1, l2) = (norm(e1), norm(e2));
                s * l1 >= -tol && (s - 1.0) * l1 <= tol && t * l2 >= -tol && (t - 1.0) * l2 <= tol
            }
            _ => false,
        }
    }
}

/// Polar radius of the Cassini oval with foci `(±a, 0)` and product `b²`.
pub fn cassini_radius(a: f64, b: f64, t: f64) -> f64 {
    let s2 = (2.0 * t).sin();
    (a * a * (2.0 * t).cos() + (b.powi(4) - a.powi(4) * s2 * s2).sqrt()).sqrt()
}
