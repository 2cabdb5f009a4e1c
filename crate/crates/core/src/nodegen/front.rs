//! Advancing-front generation: boundary nodes from the patch
//! parametrization, then interior nodes grown inward from them.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::hash::SpatialHash;
use super::rejection::{check_spacing, sampled_boundary};
use super::{halton, Generator, NodeSet};
use crate::error::{Error, Result};
use crate::geometry::{add, cross, dist, dot, norm, scale, DomainModel, ParametricPatch, PatchMap, Point};
use crate::integrate::{integrate_1d, Tolerance};

/// Spacing of the discretization set `X` relative to `h`.
pub const X_SPACING_RATIO: f64 = 1.6;

/// Candidates closer than this multiple of `h` to an existing node are rejected.
const REJECT_RADIUS: f64 = 0.9;
/// Minimum distance-to-boundary estimate of interior nodes, in units of `h`.
const BOUNDARY_CLEARANCE: f64 = 0.5;
const X_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

fn unit(p: Point) -> Point {
    scale(p, 1.0 / norm(p))
}

/// Orthonormal pair spanning the plane orthogonal to the unit vector `n`.
fn tangent_basis(n: Point) -> (Point, Point) {
    let a = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let t1 = unit(cross(n, a));
    (t1, cross(n, t1))
}

fn hexagon(u: Point, w: Point, theta: f64) -> [Point; 6] {
    std::array::from_fn(|k| {
        let (s, c) = (theta + k as f64 * PI / 3.0).sin_cos();
        add(scale(u, c), scale(w, s))
    })
}

fn icosahedron() -> [Point; 12] {
    let g = 0.5 * (1.0 + 5f64.sqrt());
    let mut v = [[0.0; 3]; 12];
    let mut i = 0;
    for a in [-1.0, 1.0] {
        for b in [-g, g] {
            v[i] = unit([0.0, a, b]);
            v[i + 1] = unit([a, b, 0.0]);
            v[i + 2] = unit([b, 0.0, a]);
            i += 3;
        }
    }
    v
}

/// Uniformly random rotation applied to `v` (unit quaternion method).
fn random_rotation(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let (x, y, z, w) = (a * (2.0 * PI * u2).sin(), a * (2.0 * PI * u2).cos(), b * (2.0 * PI * u3).sin(), b * (2.0 * PI * u3).cos());
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
        [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
        [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

fn rotate(r: &[[f64; 3]; 3], v: Point) -> Point {
    [dot(r[0], v), dot(r[1], v), dot(r[2], v)]
}

fn curve_length(p: &ParametricPatch, a: f64, b: f64) -> Result<f64> {
    integrate_1d(|t| p.area_element(&[t]), a, b, Tolerance::default())
}

/// Parameter `t > t0` with arc length `ds` from `t0` (Newton iteration).
fn advance_arc(p: &ParametricPatch, t0: f64, ds: f64) -> Result<f64> {
    if ds == 0.0 {
        return Ok(t0);
    }
    let mut t = t0 + ds / p.area_element(&[t0]);
    for _ in 0..50 {
        let f = curve_length(p, t0, t)? - ds;
        let step = f / p.area_element(&[t]);
        t -= step;
        if step.abs() <= 1e-15 * (1.0 + t.abs()) {
            break;
        }
    }
    Ok(t)
}

type Boundary = (Vec<Point>, Vec<Point>);

/// Nodes at equal arc-length spacing close to `h` along each patch.
/// Patch start points are always emitted; closed curves start at a
/// random offset.
fn curve_nodes(d: &DomainModel, h: f64, rng: &mut ChaCha8Rng) -> Result<Boundary> {
    let patches = d.patches();
    let single_loop = patches.len() == 1 && patches[0].is_periodic();
    if !single_loop {
        for (i, p) in patches.iter().enumerate() {
            let next = &patches[(i + 1) % patches.len()];
            let end = p.point(&[p.param[0][1]]);
            let start = next.point(&[next.param[0][0]]);
            if dist(end, start) > 1e-9 {
                return Err(Error::structural(format!("boundary patch {i} does not connect to the next one")));
            }
        }
    }
    let (mut z, mut nu) = (Vec::new(), Vec::new());
    for p in patches {
        let [a, b] = p.param[0];
        let len = curve_length(p, a, b)?;
        let n = ((len / h).round() as usize).max(1);
        let offset = if single_loop { rng.random::<f64>() } else { 0.0 };
        let (mut t, mut s_prev) = (a, 0.0);
        for j in 0..n {
            let s = (j as f64 + offset) * len / n as f64;
            t = advance_arc(p, t, s - s_prev)?;
            s_prev = s;
            z.push(p.point(&[t]));
            nu.push(p.normal(&[t]));
        }
    }
    Ok((z, nu))
}

/// Front on a smooth closed surface: each node spawns six candidates in
/// its tangent plane, which are projected back onto the surface.
fn surface_nodes(d: &DomainModel, h: f64, rng: &mut ChaCha8Rng) -> Result<Boundary> {
    let patch = &d.patches()[0];
    let s: Vec<f64> = patch.param.iter().map(|[lo, hi]| lo + rng.random::<f64>() * (hi - lo)).collect();
    let p0 = d
        .project_to_boundary(patch.point(&s))
        .ok_or_else(|| Error::Geometry("cannot place the first surface node".into()))?;
    let mut hash = SpatialHash::new(h, 3);
    let (mut z, mut nu) = (vec![p0], vec![d.boundary_normal(p0)?]);
    hash.insert(p0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let (u, w) = tangent_basis(nu[i]);
        let theta = rng.random::<f64>() * PI / 3.0;
        for dir in hexagon(u, w, theta) {
            let Some(q) = d.project_to_boundary(add(z[i], scale(dir, h))) else { continue };
            if hash.any_within(q, REJECT_RADIUS * h) {
                continue;
            }
            let Ok(n) = d.boundary_normal(q) else { continue };
            hash.insert(q);
            queue.push_back(z.len());
            z.push(q);
            nu.push(n);
        }
    }
    Ok((z, nu))
}

/// Polyhedral boundaries: nodes along every edge first, then a planar
/// front on each face plane seeded by the edge nodes lying in it.
fn polyhedral_nodes(d: &DomainModel, h: f64, rng: &mut ChaCha8Rng) -> Result<Boundary> {
    let mut hash = SpatialHash::new(h, 3);
    let (mut z, mut nu) = (Vec::new(), Vec::new());
    for l in d.loci() {
        let n = ((dist(l.a, l.b) / h).round() as usize).max(1);
        for j in 0..=n {
            let s = j as f64 / n as f64;
            let p = add(scale(l.a, 1.0 - s), scale(l.b, s));
            if hash.any_within(p, 1e-12) {
                continue;
            }
            hash.insert(p);
            z.push(p);
            nu.push(d.normal_at(p)?);
        }
    }
    let mut planes: Vec<(Point, f64, Vec<&ParametricPatch>)> = Vec::new();
    for p in d.patches() {
        let PatchMap::Rectangle { origin, normal, .. } = p.map else {
            return Err(Error::structural("polyhedral boundary requires flat patches"));
        };
        let off = dot(origin, normal);
        match planes.iter_mut().find(|(n, o, _)| dist(*n, normal) < 1e-12 && (o - off).abs() < 1e-12) {
            Some(g) => g.2.push(p),
            None => planes.push((normal, off, vec![p])),
        }
    }
    for (normal, off, rects) in &planes {
        let PatchMap::Rectangle { e1, .. } = rects[0].map else { unreachable!() };
        let u = unit(e1);
        let w = cross(*normal, u);
        let on_face = |p: Point| {
            (dot(p, *normal) - off).abs() <= 1e-12 && rects.iter().any(|r| r.contains_flat(p, 1e-12))
        };
        let mut queue: VecDeque<usize> = (0..z.len()).filter(|&i| on_face(z[i])).collect();
        while let Some(i) = queue.pop_front() {
            let theta = rng.random::<f64>() * PI / 3.0;
            for dir in hexagon(u, w, theta) {
                let c = add(z[i], scale(dir, h));
                if !on_face(c)
                    || d.loci().iter().any(|l| l.distance(c) < BOUNDARY_CLEARANCE * h)
                    || hash.any_within(c, REJECT_RADIUS * h)
                {
                    continue;
                }
                hash.insert(c);
                queue.push_back(z.len());
                z.push(c);
                nu.push(*normal);
            }
        }
    }
    Ok((z, nu))
}

/// Grows interior nodes from `boundary`: every front node proposes
/// candidates at distance `h` (hexagonal in 2D, icosahedral in 3D, with a
/// random rotation per node).
fn interior_front(d: &DomainModel, h: f64, boundary: &[Point], rng: &mut ChaCha8Rng) -> Vec<Point> {
    let dim = d.dim();
    let mut hash = SpatialHash::new(h, dim);
    let mut front: VecDeque<Point> = boundary.iter().copied().collect();
    for &p in boundary {
        hash.insert(p);
    }
    let mut interior = Vec::new();
    if front.is_empty() {
        let p = d.interior_witness();
        hash.insert(p);
        interior.push(p);
        front.push_back(p);
    }
    let ico = icosahedron();
    while let Some(p) = front.pop_front() {
        let dirs: Vec<Point> = if dim == 2 {
            hexagon([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], rng.random::<f64>() * PI / 3.0).to_vec()
        } else {
            let r = random_rotation(rng);
            ico.iter().map(|&v| rotate(&r, v)).collect()
        };
        for dir in dirs {
            let c = add(p, scale(dir, h));
            if !d.inside(c)
                || d.implicit().distance_estimate(c) < BOUNDARY_CLEARANCE * h
                || hash.any_within(c, REJECT_RADIUS * h)
            {
                continue;
            }
            hash.insert(c);
            interior.push(c);
            front.push_back(c);
        }
    }
    interior
}

/// Closed node set at spacing `h` by the advancing-front method.
///
/// Boundary nodes come from the patch parametrization. Domains without
/// patches get boundary nodes from Halton samples projected onto the
/// boundary and thinned at `h`.
pub fn advancing_front(d: &DomainModel, h: f64, seed: u64) -> Result<NodeSet> {
    check_spacing(h)?;
    let dim = d.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flat = d.patches().iter().all(|p| matches!(p.map, PatchMap::Rectangle { .. }));
    let (boundary, normals) = if d.patches().is_empty() {
        let bbox = d.bounding_box();
        let n_h = (bbox.measure(dim) / h.powi(dim as i32)).round() as usize;
        sampled_boundary(d, h, &halton(seed, n_h, dim, &bbox))?
    } else if dim == 2 {
        curve_nodes(d, h, &mut rng)?
    } else if flat {
        polyhedral_nodes(d, h, &mut rng)?
    } else {
        surface_nodes(d, h, &mut rng)?
    };
    let interior = interior_front(d, h, &boundary, &mut rng);
    let degenerate = boundary.len() < 2 * dim || interior.is_empty();
    Ok(NodeSet {
        dim,
        interior,
        boundary,
        normals,
        h,
        seed,
        closed: true,
        generator: Generator::AdvancingFront,
        degenerate,
    })
}

/// Discretization set `X`: a closed advancing-front set at spacing
/// `ratio·h`, drawn independently of the quadrature nodes of the same seed.
pub fn make_x(d: &DomainModel, h: f64, seed: u64, ratio: f64) -> Result<NodeSet> {
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::structural(format!("spacing ratio must be positive, got {ratio}")));
    }
    let mut x = advancing_front(d, ratio * h, seed ^ X_SEED_SALT)?;
    x.seed = seed;
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosahedron_neighbors_are_farther_than_rejection_radius() {
        let v = icosahedron();
        for i in 0..12 {
            assert!((norm(v[i]) - 1.0).abs() < 1e-15);
            for j in 0..i {
                assert!(dist(v[i], v[j]) > 1.0);
            }
        }
    }

    #[test]
    fn rotation_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = random_rotation(&mut rng);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((dot(r[i], r[j]) - e).abs() < 1e-14);
            }
        }
    }
}
