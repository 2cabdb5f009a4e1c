use std::f64::consts::PI;

use mfquad::geometry::{BoundingBox, Builtin};
use mfquad::nodegen::{advancing_front, halton, make_x, rejection_sample, NeighborIndex, SamplingMode};
use mfquad::Point;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const UNIT: BoundingBox = BoundingBox { lo: [0.0; 3], hi: [1.0; 3] };

fn dist(a: Point, b: Point) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>().sqrt()
}

fn unit(v: Point) -> Point {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

#[test]
fn patch_samples_lie_on_the_level_set_with_matching_normals() {
    for b in Builtin::ALL {
        let d = b.model();
        for patch in d.patches() {
            let box_ = BoundingBox {
                lo: [patch.param[0][0], patch.param.get(1).map_or(0.0, |r| r[0]), 0.0],
                hi: [patch.param[0][1], patch.param.get(1).map_or(0.0, |r| r[1]), 0.0],
            };
            for s in halton(0, 1000, 2, &box_) {
                let s = &s[..patch.param_dim()];
                let p = patch.point(s);
                assert!(d.phi(p).abs() <= 1e-10, "{b}: phi = {:e} at {p:?}", d.phi(p));
                if d.near_locus(p) {
                    continue;
                }
                let n = patch.normal(s);
                let g = unit(d.implicit().grad_phi(p));
                if g.iter().all(|v| v.is_finite()) {
                    assert!(dist(n, g) <= 1e-8, "{b}: normal {n:?} vs gradient {g:?}");
                }
            }
        }
    }
}

#[test]
fn witness_is_inside_and_box_corners_are_outside() {
    for b in Builtin::ALL {
        let d = b.model();
        assert!(d.inside(d.interior_witness()), "{b}");
        assert!(d.inside(d.fundamental_center()), "{b}");
        for c in d.bounding_box().corners(b.dim()) {
            assert!(!d.inside(c), "{b} corner {c:?}");
        }
    }
}

#[test]
fn disk_sector_membership_follows_polar_definition() {
    let d = Builtin::DiskSector.model();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..2000 {
        let p: Point = [rng.random_range(-1.2..1.2), rng.random_range(-1.2..1.2), 0.0];
        let r = p[0].hypot(p[1]);
        let theta = p[1].atan2(p[0]).rem_euclid(2.0 * PI);
        let polar = r < 1.0 && theta > 0.0 && theta < 1.5 * PI;
        if (r - 1.0).abs() > 1e-9 && p[0].abs() > 1e-9 && p[1].abs() > 1e-9 {
            assert_eq!(d.inside(p), polar, "{p:?}");
        }
    }
    assert!(!d.inside([0.5, -0.1, 0.0]));
}

#[test]
fn cassini_projection_satisfies_the_quartic() {
    let d = Builtin::CassiniOval.model();
    let z = d.project_to_boundary([0.0, 0.35, 0.0]).unwrap();
    // ((x−a)² + y²)((x+a)² + y²) = b⁴ with a = 0.95, b = 1
    let (a, x, y) = (0.95, z[0], z[1]);
    let q = ((x - a).powi(2) + y * y) * ((x + a).powi(2) + y * y) - 1.0;
    assert!(q.abs() <= 1e-11, "quartic residual {q:e}");
}

#[test]
fn halton_beats_pseudorandom_in_a_box_count_test() {
    let n = 1000;
    let star = |pts: &[Point]| {
        let mut worst = 0.0f64;
        for i in 1..=40 {
            for j in 1..=40 {
                let (a, b) = (i as f64 / 40.0, j as f64 / 40.0);
                let count = pts.iter().filter(|p| p[0] < a && p[1] < b).count();
                worst = worst.max((count as f64 / n as f64 - a * b).abs());
            }
        }
        worst
    };
    let quasi = halton(0, n, 2, &UNIT);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let random: Vec<Point> = (0..n).map(|_| [rng.random(), rng.random(), 0.0]).collect();
    let (dq, dr) = (star(&quasi), star(&random));
    assert!(dq < dr, "halton {dq} vs random {dr}");
    assert!(halton(3, 0, 2, &UNIT).is_empty());
}

#[test]
fn grid_rejection_count_follows_packing_relation() {
    let d = Builtin::Ellipse.model();
    let expected = 0.75 * PI / 0.01;
    for seed in 1..=3 {
        let nodes = rejection_sample(&d, 0.1, SamplingMode::Grid, seed).unwrap();
        let n = nodes.n_y() as f64;
        assert!((n - expected).abs() <= 0.15 * expected, "N_Y = {n}, expected ≈ {expected}");
    }
}

#[test]
fn halton_rejection_differs_by_seed_but_not_in_size() {
    let d = Builtin::Ellipse.model();
    let a = rejection_sample(&d, 0.05, SamplingMode::Halton, 1).unwrap();
    let b = rejection_sample(&d, 0.05, SamplingMode::Halton, 2).unwrap();
    assert_ne!(a.interior, b.interior);
    let (na, nb) = (a.n_y() as f64, b.n_y() as f64);
    assert!((na - nb).abs() <= 0.05 * na);
}

#[test]
fn oversized_spacing_is_degenerate() {
    let d = Builtin::Ellipse.model();
    for mode in [SamplingMode::Grid, SamplingMode::Halton, SamplingMode::Random] {
        let nodes = rejection_sample(&d, 5.0, mode, 1).unwrap();
        assert!(nodes.degenerate || nodes.boundary.len() <= 2);
    }
}

#[test]
fn ellipse_front_spacing_matches_perimeter() {
    // perimeter by the periodic trapezoid rule, spectrally accurate
    let m = 4096;
    let perimeter: f64 = (0..m)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / m as f64;
            (t.sin().powi(2) + 0.5625 * t.cos().powi(2)).sqrt()
        })
        .sum::<f64>()
        * 2.0
        * PI
        / m as f64;
    let nodes = advancing_front(&Builtin::Ellipse.model(), 0.1, 1).unwrap();
    let nz = nodes.n_z() as f64;
    assert!((nz - perimeter / 0.1).abs() <= 3.0, "N_Z = {nz}, perimeter {perimeter}");
}

#[test]
fn disk_sector_front_emits_corners() {
    let nodes = advancing_front(&Builtin::DiskSector.model(), 0.1, 1).unwrap();
    for c in [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, -1.0, 0.0]] {
        assert!(nodes.boundary.contains(&c), "missing corner {c:?}");
    }
}

#[test]
fn torus_boundary_nodes_lie_on_the_surface_with_outward_normals() {
    let d = Builtin::Torus.model();
    let nodes = advancing_front(&d, 0.1, 1).unwrap();
    for (z, n) in nodes.boundary.iter().zip(&nodes.normals) {
        assert!(d.phi(*z).abs() <= 1e-10);
        let g = d.implicit().grad_phi(*z);
        assert!(n[0] * g[0] + n[1] * g[1] + n[2] * g[2] > 0.0);
    }
}

#[test]
fn ellipse_front_is_quasi_uniform() {
    let d = Builtin::Ellipse.model();
    for h in [0.1, 0.05] {
        let y = advancing_front(&d, h, 2).unwrap().y();
        let idx = NeighborIndex::new(y.clone(), 2);
        let nn: Vec<f64> = y.iter().map(|&p| dist(p, idx.point(idx.knn(p, 2).unwrap()[1]))).collect();
        let (lo, hi) = nn.iter().fold((f64::MAX, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        assert!(hi / lo < 4.0, "h = {h}: nearest-neighbor ratio {}", hi / lo);
    }
}

#[test]
fn x_nodes_are_coarser_by_the_spacing_ratio() {
    let d = Builtin::Ellipse.model();
    let ny = advancing_front(&d, 0.05, 1).unwrap().n_y() as f64;
    let nx = make_x(&d, 0.05, 1, 1.6).unwrap().all_points().len() as f64;
    let expected = ny / 1.6f64.powi(2);
    assert!((nx - expected).abs() <= 0.2 * expected, "N_X = {nx}, expected ≈ {expected}");
}

#[test]
fn lshape_x_nodes_include_edge_nodes() {
    let d = Builtin::LShape3D.model();
    let x = make_x(&d, 0.1, 1, 1.6).unwrap();
    assert!(x.boundary.iter().any(|&p| d.near_locus(p)));
}

#[test]
fn knn_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let pts: Vec<Point> = (0..1000).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
    let idx = NeighborIndex::new(pts.clone(), 3);
    for _ in 0..100 {
        let p: Point = [rng.random(), rng.random(), rng.random()];
        let mut order: Vec<usize> = (0..pts.len()).collect();
        let d2 = |j: usize| (0..3).map(|k| (pts[j][k] - p[k]).powi(2)).sum::<f64>();
        order.sort_by(|&a, &b| d2(a).total_cmp(&d2(b)).then(a.cmp(&b)));
        assert_eq!(idx.knn(p, 30).unwrap(), order[..30]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn node_generation_is_deterministic(seed in 0u64..1000, which in 0usize..3) {
        let b = [Builtin::Ellipse, Builtin::DiskSector, Builtin::CassiniOval][which];
        let d = b.model();
        prop_assert_eq!(advancing_front(&d, 0.1, seed).unwrap(), advancing_front(&d, 0.1, seed).unwrap());
        prop_assert_eq!(
            rejection_sample(&d, 0.1, SamplingMode::Random, seed).unwrap(),
            rejection_sample(&d, 0.1, SamplingMode::Random, seed).unwrap()
        );
    }

    #[test]
    fn front_nodes_are_inside_and_separated(seed in 0u64..1000) {
        let d = Builtin::CassiniOval.model();
        let nodes = advancing_front(&d, 0.1, seed).unwrap();
        for p in &nodes.interior {
            prop_assert!(d.inside(*p));
        }
        let y = nodes.y();
        let idx = NeighborIndex::new(y.clone(), 2);
        for &p in &y {
            let nn = idx.knn(p, 2).unwrap()[1];
            prop_assert!(dist(p, idx.point(nn)) > 0.4 * 0.1);
        }
    }
}
