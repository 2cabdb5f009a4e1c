use mfquad::bspline::make_space;
use mfquad::geometry::{Builtin, DomainModel};
use mfquad::harness::{reference_integral, runge_center, Target, TestFunction};
use mfquad::nodegen::{advancing_front, NodeSet};
use mfquad::quadrature::{
    assemble_operators, build_system, check_discrete_incompatibility, compute_weights, fundamental_ghat, ConstraintKind,
    ConstraintSpec, Method, QuadratureOptions, QuadratureRule,
};
use mfquad::sparse::solve_min_norm_qr;
use mfquad::{Error, SparseMatrix, TripletMatrix};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rule(b: Builtin, method: Method, q: usize, h: f64, seed: u64, c: ConstraintKind) -> (DomainModel, NodeSet, QuadratureRule) {
    let d = b.model();
    let nodes = advancing_front(&d, h, seed).unwrap();
    let r = compute_weights(&d, &nodes, &QuadratureOptions::new(method, q, c)).unwrap();
    (d, nodes, r)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[test]
fn mfd_boundary_constant_rule_meets_its_constraint() {
    let (d, _, r) = rule(Builtin::Ellipse, Method::Mfd, 4, 0.1, 1, ConstraintKind::BoundaryConstant);
    let perimeter = d.measure_boundary().unwrap();
    assert!((r.v.iter().sum::<f64>() - perimeter).abs() <= 1e-10);
    assert!(r.residual_inf <= 1e-10 * perimeter.max(1.0));
    assert_eq!(r.w.len(), r.y.len());
    assert_eq!(r.v.len(), r.z.len());
}

#[test]
fn bsp_rule_integrates_the_ellipse_area() {
    let (d, _, r) = rule(Builtin::Ellipse, Method::Bsp, 4, 0.1, 1, ConstraintKind::BoundaryConstant);
    let area = d.measure_interior().unwrap();
    assert!(((r.w.iter().sum::<f64>() - area) / area).abs() <= 1e-3);
}

#[test]
fn apply_rule_on_constraint_moments() {
    let (d, _, r) = rule(Builtin::Ellipse, Method::Mfd, 4, 0.1, 1, ConstraintKind::BoundaryConstant);
    let (ones_y, ones_z) = (vec![1.0; r.w.len()], vec![1.0; r.v.len()]);
    let perimeter = d.measure_boundary().unwrap();
    assert!((r.apply(None, Some(&ones_z)).unwrap() + perimeter).abs() <= 1e-10);

    let (d, _, r) = rule(Builtin::Ellipse, Method::Mfd, 4, 0.1, 1, ConstraintKind::Combined);
    let target = d.measure_interior().unwrap() - d.measure_boundary().unwrap();
    let got = r.apply(Some(&ones_y), Some(&ones_z)).unwrap();
    // Σw + Σv = |Ω| + |∂Ω| is enforced, and Σw ≈ |Ω|, Σv ≈ |∂Ω| to quadrature accuracy
    assert!((r.w.iter().sum::<f64>() + r.v.iter().sum::<f64>() - (target + 2.0 * perimeter)).abs() <= 1e-10);
    assert!((got - target).abs() <= 1e-4, "{got} vs {target}");

    assert!(matches!(r.apply(Some(&ones_z), None), Err(Error::Structural(_))));
}

#[test]
fn mfd_rule_integrates_runge_on_the_ellipse() {
    let (d, _, r) = rule(Builtin::Ellipse, Method::Mfd, 5, 0.025, 1, ConstraintKind::BoundaryConstant);
    let f = TestFunction::runge(runge_center(Builtin::Ellipse), 2);
    let exact = reference_integral(&d, &f, Target::Interior).unwrap();
    let got = r.integrate_interior(|p| f.eval(p).unwrap());
    // observed 4.5e-6 for this seed; other seeds range down to 5e-7
    assert!(((got - exact) / exact).abs() <= 1e-5, "{got} vs {exact}");
}

#[test]
fn bsp_rules_vanish_on_the_discrete_range() {
    let b = Builtin::Ellipse;
    let (d, nodes, r) = rule(b, Method::Bsp, 4, 0.1, 1, ConstraintKind::BoundaryConstant);
    let space = make_space(&d, nodes.h, 4, mfquad::bspline::KNOT_SPACING_RATIO).unwrap();
    let ns = space.n_basis();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let c: Vec<f64> = (0..2 * ns).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (c0, c1) = c.split_at(ns);
        let div: Vec<f64> = r
            .y
            .iter()
            .map(|&p| space.eval(p, c0, Some(0)).unwrap() + space.eval(p, c1, Some(1)).unwrap())
            .collect();
        let trace: Vec<f64> = r
            .z
            .iter()
            .zip(&nodes.normals)
            .map(|(&p, n)| n[0] * space.eval(p, c0, None).unwrap() + n[1] * space.eval(p, c1, None).unwrap())
            .collect();
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        let value = r.apply(Some(&div), Some(&trace)).unwrap();
        assert!(value.abs() <= 1e-9 * norm, "{value:e} for ‖c‖ = {norm}");
    }
}

fn permute_columns(m: &SparseMatrix, perm: &[usize]) -> SparseMatrix {
    let mut t = TripletMatrix::new(m.nrows(), m.ncols());
    for (i, j, v) in m.iter() {
        t.push(i, perm[j], v);
    }
    t.finalize().unwrap()
}

/// Solves the BSP system with the basis order shuffled and compares the
/// weights with those of `compute_weights`.
fn check_basis_order(b: Builtin, q: usize, h: f64, rank_tol: Option<f64>) {
    let d = b.model();
    let nodes = advancing_front(&d, h, 1).unwrap();
    let mut opts = QuadratureOptions::new(Method::Bsp, q, ConstraintKind::BoundaryConstant);
    opts.rank_tol = rank_tol;
    let r = compute_weights(&d, &nodes, &opts).unwrap();
    let (l, bm) = assemble_operators(&d, &nodes, &opts).unwrap();
    let rows = ConstraintSpec::new(ConstraintKind::BoundaryConstant, &d)
        .unwrap()
        .rows(2, &r.y, &r.z, &nodes.normals)
        .unwrap();
    let mut perm: Vec<usize> = (0..l.ncols()).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(7));
    let (a, rhs, _) = build_system(&permute_columns(&l, &perm), &permute_columns(&bm, &perm), &rows).unwrap();
    let x = solve_min_norm_qr(&a, &rhs, rank_tol.unwrap_or(1e-15)).unwrap().solution;
    let (w, v) = x.split_at(r.w.len());
    let scale = max_abs(&r.w).max(max_abs(&r.v));
    for (x, y) in w.iter().zip(&r.w).chain(v.iter().zip(&r.v)) {
        assert!((x - y).abs() <= 1e-10 * scale, "{b} q={q} h={h}: {x} vs {y}");
    }
}

#[test]
fn bsp_weights_do_not_depend_on_basis_order() {
    // full row rank at the default tolerance
    check_basis_order(Builtin::DiskSector, 3, 0.05, None);
    check_basis_order(Builtin::CassiniOval, 3, 0.1, None);
    // rank deficient: needs a tolerance above the rounding level of the factorization
    check_basis_order(Builtin::Ellipse, 4, 0.1, Some(1e-12));
}

#[test]
fn boundary_rule_reproduces_the_fundamental_solution_flux() {
    for b in [Builtin::Ellipse, Builtin::DiskSector] {
        let g1 = TestFunction::runge(runge_center(b), 2);
        let exact = reference_integral(&b.model(), &g1, Target::Boundary).unwrap();
        let mut last = f64::INFINITY;
        for h in [0.1, 0.05] {
            let (d, nodes, r) = rule(b, Method::Mfd, 5, h, 1, ConstraintKind::BoundaryConstant);
            let x0 = d.fundamental_center();
            let flux: f64 = r
                .v
                .iter()
                .zip(r.z.iter().zip(&nodes.normals))
                .map(|(v, (&z, &n))| v * fundamental_ghat(2, x0, z, n).unwrap())
                .sum();
            // the boundary quadrature error of the same rule on a smooth trace
            let e_g = ((r.integrate_boundary(|p| g1.eval(p).unwrap()) - exact) / exact).abs();
            let e = (flux - 1.0).abs();
            assert!(e <= 10.0 * e_g + 1e-12, "{b} h={h}: flux error {e:e}, boundary error {e_g:e}");
            assert!(e < last);
            last = e;
        }
    }
}

#[test]
fn weights_are_stable_at_desk_scale() {
    for b in [Builtin::Ellipse, Builtin::DiskSector, Builtin::CassiniOval] {
        let area = reference_integral(&b.model(), &TestFunction::constant(1.0, 2), Target::Interior).unwrap();
        for method in [Method::Mfd, Method::Bsp] {
            for seed in 1..=8 {
                let (_, _, r) = rule(b, method, 5, 0.025, seed, ConstraintKind::BoundaryConstant);
                assert!(r.k_v_normalized);
                let k_w = if r.k_w_normalized { r.k_w } else { r.k_w / area };
                assert!(k_w <= 5.0, "{b} {method} seed {seed}: K_w = {k_w}");
                assert!(r.k_v <= 1.2, "{b} {method} seed {seed}: K_v = {}", r.k_v);
            }
        }
    }
}

#[test]
fn both_constraint_adds_two_signed_rows() {
    let (d, nodes, _) = rule(Builtin::DiskSector, Method::Mfd, 4, 0.1, 1, ConstraintKind::Both);
    let opts = QuadratureOptions::new(Method::Mfd, 4, ConstraintKind::Both);
    let (l, b) = assemble_operators(&d, &nodes, &opts).unwrap();
    let rows = ConstraintSpec::new(ConstraintKind::Both, &d).unwrap().rows(2, &nodes.y(), &nodes.boundary, &nodes.normals).unwrap();
    let (a, rhs, _) = build_system(&l, &b, &rows).unwrap();
    let n = rhs.len();
    assert_eq!(&rhs[n - 2..], [d.measure_interior().unwrap(), -d.measure_boundary().unwrap()]);
    assert!(rhs[..n - 2].iter().all(|&x| x == 0.0));
    let ny = nodes.n_y();
    let (cols, vals) = a.row(a.nrows() - 1);
    assert!(cols.iter().all(|&j| j >= ny) && vals.iter().all(|&v| v == -1.0));
}

#[test]
fn fundamental_constraint_needs_no_measure() {
    let d = Builtin::DecoTetrahedron.model();
    assert!(matches!(ConstraintSpec::new(ConstraintKind::BoundaryConstant, &d), Err(Error::UnknownMeasure(_))));
    let spec = ConstraintSpec::new(ConstraintKind::FundamentalSolution, &d).unwrap();
    let z = [[2.0, 0.0, 0.0]];
    let rows = spec.rows(3, &[[0.0; 3]], &z, &[[1.0, 0.0, 0.0]]).unwrap();
    assert_eq!(rows[0].rhs, -1.0);
    assert_eq!(rows[0].over_y, [0.0]);
    assert!(rows[0].over_z[0] < 0.0);
}

#[test]
fn pruned_rows_are_splines_without_nodes_in_their_support() {
    let (d, nodes, r) = rule(Builtin::Ellipse, Method::Bsp, 4, 0.1, 1, ConstraintKind::BoundaryConstant);
    let space = make_space(&d, nodes.h, 4, mfquad::bspline::KNOT_SPACING_RATIO).unwrap();
    let (nx, ny) = (space.axes[0].n_basis(), space.axes[1].n_basis());
    let pts: Vec<_> = r.y.iter().chain(&r.z).collect();
    let mut empty = 0;
    for j in 0..ny {
        for i in 0..nx {
            let (ax, ay) = (&space.axes[0], &space.axes[1]);
            let (x0, x1, y0, y1) = (ax.knot(i), ax.knot(i + 4), ay.knot(j), ay.knot(j + 4));
            if !pts.iter().any(|p| p[0] > x0 && p[0] < x1 && p[1] > y0 && p[1] < y1) {
                empty += 1;
            }
        }
    }
    assert!(empty > 0);
    assert_eq!(r.pruned_rows, 2 * empty);
}

#[test]
fn refusals_for_overdetermined_and_oversized_stencils() {
    let d = Builtin::Ellipse.model();
    let nodes = advancing_front(&d, 0.5, 1).unwrap();
    let err = compute_weights(&d, &nodes, &QuadratureOptions::new(Method::Mfd, 12, ConstraintKind::BoundaryConstant));
    assert!(matches!(err, Err(Error::StencilTooLarge { .. })), "{err:?}");
    let nodes = advancing_front(&d, 0.05, 1).unwrap();
    let mut opts = QuadratureOptions::new(Method::Bsp, 3, ConstraintKind::BoundaryConstant);
    opts.knot_ratio = 0.5;
    let err = compute_weights(&d, &nodes, &opts);
    assert!(matches!(err, Err(Error::Overdetermined { .. })), "{err:?}");
}

#[test]
fn discrete_incompatibility_diagnostic() {
    let d = Builtin::Ellipse.model();
    let nodes = advancing_front(&d, 0.1, 1).unwrap();
    let opts = QuadratureOptions::new(Method::Mfd, 4, ConstraintKind::BoundaryConstant);
    let (l, b) = assemble_operators(&d, &nodes, &opts).unwrap();
    let (fhat, ghat) = (vec![0.0; l.nrows()], vec![1.0; b.nrows()]);
    assert!(check_discrete_incompatibility(&l, &b, &fhat, &ghat).unwrap());

    let rows: Vec<usize> = (0..l.nrows()).step_by(3).collect();
    let copy = l.select_rows(&rows);
    let fhat = vec![1.0; l.nrows()];
    let ghat: Vec<f64> = rows.iter().map(|&i| fhat[i]).collect();
    assert!(!check_discrete_incompatibility(&l, &copy, &fhat, &ghat).unwrap());
}
