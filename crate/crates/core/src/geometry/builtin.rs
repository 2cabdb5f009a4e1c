//! The seven built-in test domains.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use super::{BoundingBox, DomainModel, ImplicitDomain, Locus, ParametricPatch, PatchMap, Point, Shape};
use crate::error::Error;
use crate::integrate::{integrate_1d, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Builtin {
    /// Ellipse with semi-axes 1 and 3/4.
    Ellipse,
    /// Unit disk sector `0 < θ < 3π/2`.
    DiskSector,
    /// Cassini oval with foci `(±0.95, 0)` and product of distances 1.
    CassiniOval,
    /// Ellipsoid with semi-axes 1, 0.7, 0.7.
    Ellipsoid,
    /// Box `[−1,1]² × [−1/3,1/3]` with the quadrant `x > 0, y < 0` removed.
    LShape3D,
    /// Solid torus with radii 1 and 0.32.
    Torus,
    /// Scaled quartic level set `ψ(a x) + 15 < 0`, `a = 40^{1/3}`.
    DecoTetrahedron,
}

impl Builtin {
    pub const ALL: [Builtin; 7] = [
        Builtin::Ellipse,
        Builtin::DiskSector,
        Builtin::CassiniOval,
        Builtin::Ellipsoid,
        Builtin::LShape3D,
        Builtin::Torus,
        Builtin::DecoTetrahedron,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Ellipse => "ellipse",
            Builtin::DiskSector => "disk-sector",
            Builtin::CassiniOval => "cassini",
            Builtin::Ellipsoid => "ellipsoid",
            Builtin::LShape3D => "lshape3d",
            Builtin::Torus => "torus",
            Builtin::DecoTetrahedron => "decotet",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Builtin::Ellipse | Builtin::DiskSector | Builtin::CassiniOval => 2,
            _ => 3,
        }
    }

    pub fn model(self) -> DomainModel {
        make_builtin(self)
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown domain `{s}`")))
    }
}

/// Scale factor of the deco-tetrahedron, `40^{1/3}`.
pub fn deco_scale() -> f64 {
    40f64.cbrt()
}

/// Half-width of the deco-tetrahedron's tight box along every axis.
const DECO_HALF_WIDTH: f64 = 1.0641;

fn curve_length(p: &ParametricPatch) -> f64 {
    let [a, b] = p.param[0];
    integrate_1d(|t| p.area_element(&[t]), a, b, Tolerance::new(1e-14, 1e-14))
        .expect("smooth curve length converges")
}

fn sampled_box(p: &ParametricPatch, n: usize) -> BoundingBox {
    let [a, b] = p.param[0];
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for i in 0..=n {
        let q = p.point(&[a + (b - a) * i as f64 / n as f64]);
        for k in 0..2 {
            lo[k] = lo[k].min(q[k]);
            hi[k] = hi[k].max(q[k]);
        }
    }
    lo[2] = 0.0;
    hi[2] = 0.0;
    BoundingBox { lo, hi }
}

fn rect(origin: Point, e1: Point, e2: Point, normal: Point) -> ParametricPatch {
    ParametricPatch::new(PatchMap::Rectangle { origin, e1, e2, normal })
}

fn lshape_patches(hz: f64) -> Vec<ParametricPatch> {
    let zl = -hz;
    let zh = 2.0 * hz;
    let mut v = Vec::new();
    // top and bottom: three unit squares each
    for (z, nz) in [(hz, 1.0), (-hz, -1.0)] {
        for (x0, y0) in [(-1.0, -1.0), (-1.0, 0.0), (0.0, 0.0)] {
            v.push(rect([x0, y0, z], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, nz]));
        }
    }
    v.push(rect([-1.0, -1.0, zl], [0.0, 2.0, 0.0], [0.0, 0.0, zh], [-1.0, 0.0, 0.0]));
    v.push(rect([1.0, 0.0, zl], [0.0, 1.0, 0.0], [0.0, 0.0, zh], [1.0, 0.0, 0.0]));
    v.push(rect([-1.0, 1.0, zl], [2.0, 0.0, 0.0], [0.0, 0.0, zh], [0.0, 1.0, 0.0]));
    v.push(rect([-1.0, -1.0, zl], [1.0, 0.0, 0.0], [0.0, 0.0, zh], [0.0, -1.0, 0.0]));
    v.push(rect([0.0, -1.0, zl], [0.0, 1.0, 0.0], [0.0, 0.0, zh], [1.0, 0.0, 0.0]));
    v.push(rect([0.0, 0.0, zl], [1.0, 0.0, 0.0], [0.0, 0.0, zh], [0.0, -1.0, 0.0]));
    v
}

fn lshape_edges(hz: f64) -> Vec<Locus> {
    let poly = [[-1.0, -1.0], [0.0, -1.0], [0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [-1.0, 1.0]];
    let mut e = Vec::new();
    for (i, p) in poly.iter().enumerate() {
        let q = poly[(i + 1) % poly.len()];
        for z in [-hz, hz] {
            e.push(Locus { a: [p[0], p[1], z], b: [q[0], q[1], z] });
        }
        e.push(Locus { a: [p[0], p[1], -hz], b: [p[0], p[1], hz] });
    }
    e
}

/// Builds one of the built-in domains with its patches and known measures.
pub fn make_builtin(which: Builtin) -> DomainModel {
    let origin = [0.0; 3];
    match which {
        Builtin::Ellipse => {
            let (a, b) = (1.0, 0.75);
            let patch = ParametricPatch::new(PatchMap::EllipseArc { a, b });
            let perimeter = curve_length(&patch);
            DomainModel {
                builtin: which,
                implicit: ImplicitDomain {
                    dim: 2,
                    shape: Shape::Ellipse { a, b },
                    tight_box: BoundingBox { lo: [-a, -b, 0.0], hi: [a, b, 0.0] },
                },
                patches: vec![patch],
                measure_interior: Some(PI * a * b),
                measure_boundary: Some(perimeter),
                interior_witness: origin,
                fundamental_center: origin,
                clearance: b,
                loci: Vec::new(),
            }
        }
        Builtin::DiskSector => {
            let patches = vec![
                ParametricPatch::new(PatchMap::Segment { p0: origin, p1: [1.0, 0.0, 0.0], normal: [0.0, -1.0, 0.0] }),
                ParametricPatch::new(PatchMap::CircleArc { radius: 1.0 }).with_param(vec![[0.0, 1.5 * PI]]),
                ParametricPatch::new(PatchMap::Segment { p0: [0.0, -1.0, 0.0], p1: origin, normal: [1.0, 0.0, 0.0] }),
            ];
            let c = 0.5 * (0.75 * PI).cos();
            DomainModel {
                builtin: which,
                implicit: ImplicitDomain {
                    dim: 2,
                    shape: Shape::DiskSector,
                    tight_box: BoundingBox { lo: [-1.0, -1.0, 0.0], hi: [1.0, 1.0, 0.0] },
                },
                patches,
                measure_interior: Some(0.75 * PI),
                measure_boundary: Some(2.0 + 1.5 * PI),
                interior_witness: [-0.5, 0.5, 0.0],
                fundamental_center: [c, -c, 0.0],
                clearance: 0.45,
                loci: [origin, [1.0, 0.0, 0.0], [0.0, -1.0, 0.0]].into_iter().map(|p| Locus { a: p, b: p }).collect(),
            }
        }
        Builtin::CassiniOval => {
            let (a, b): (f64, f64) = (0.95, 1.0);
            let patch = ParametricPatch::new(PatchMap::CassiniArc { a, b });
            let perimeter = curve_length(&patch);
            let tight_box = sampled_box(&patch, 200_000);
            DomainModel {
                builtin: which,
                implicit: ImplicitDomain { dim: 2, shape: Shape::Cassini { a, b }, tight_box },
                patches: vec![patch],
                measure_interior: None,
                measure_boundary: Some(perimeter),
                interior_witness: origin,
                fundamental_center: origin,
                clearance: (b * b - a * a).sqrt() * 0.99,
                loci: Vec::new(),
            }
        }
        Builtin::Ellipsoid => {
            let axes: [f64; 3] = [1.0, 0.7, 0.7];
            let (a, c) = (axes[0], axes[1]);
            let e = (1.0 - c * c / (a * a)).sqrt();
            let area = 2.0 * PI * c * c * (1.0 + a / (c * e) * e.asin());
            DomainModel {
                builtin: which,
                implicit: ImplicitDomain {
                    dim: 3,
                    shape: Shape::Ellipsoid { axes },
                    tight_box: BoundingBox { lo: [-1.0, -0.7, -0.7], hi: [1.0, 0.7, 0.7] },
                },
                patches: vec![ParametricPatch::new(PatchMap::Ellipsoid { axes })],
                measure_interior: Some(4.0 / 3.0 * PI * axes[0] * axes[1] * axes[2]),
                measure_boundary: Some(area),
                interior_witness: origin,
                fundamental_center: origin,
                clearance: 0.7,
                loci: Vec::new(),
            }
        }
        Builtin::LShape3D => {
            let hz = 1.0 / 3.0;
            DomainModel {
                builtin: which,
                implicit: ImplicitDomain {
                    dim: 3,
                    shape: Shape::LShape { half: [1.0, 1.0, hz] },
                    tight_box: BoundingBox { lo: [-1.0, -1.0, -hz], hi: [1.0, 1.0, hz] },
                },
                patches: lshape_patches(hz),
                measure_interior: Some(2.0),
                measure_boundary: Some(6.0 + 16.0 / 3.0),
                interior_witness: [-0.5, 0.5, 0.0],
                fundamental_center: [0.5, 0.5, 0.0],
                clearance: hz,
                loci: lshape_edges(hz),
            }
        }
        Builtin::Torus => {
            let (major, minor) = (1.0, 0.32);
            let outer = major + minor;
            DomainModel {
                builtin: which,
                implicit: ImplicitDomain {
                    dim: 3,
                    shape: Shape::Torus { major, minor },
                    tight_box: BoundingBox { lo: [-outer, -outer, -minor], hi: [outer, outer, minor] },
                },
                patches: vec![ParametricPatch::new(PatchMap::Torus { major, minor })],
                measure_interior: Some(2.0 * PI * PI * major * minor * minor),
                measure_boundary: Some(4.0 * PI * PI * major * minor),
                interior_witness: [major, 0.0, 0.0],
                fundamental_center: [major, 0.0, 0.0],
                clearance: minor,
                loci: Vec::new(),
            }
        }
        Builtin::DecoTetrahedron => {
            let s = deco_scale();
            let w = DECO_HALF_WIDTH;
            let x0 = [1.0 / s, -2.5 / s, 1.0 / s];
            DomainModel {
                builtin: which,
                implicit: ImplicitDomain {
                    dim: 3,
                    shape: Shape::DecoTetrahedron { scale: s, level: 15.0 },
                    tight_box: BoundingBox { lo: [-w; 3], hi: [w; 3] },
                },
                patches: Vec::new(),
                measure_interior: None,
                measure_boundary: None,
                interior_witness: x0,
                fundamental_center: x0,
                clearance: 0.1,
                loci: Vec::new(),
            }
        }
    }
}
