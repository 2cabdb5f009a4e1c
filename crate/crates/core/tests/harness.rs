use std::f64::consts::PI;

use mfquad::geometry::Builtin;
use mfquad::harness::{
    franke, reference_integral, reference_integral_with, run_study, runge_center, ExperimentConfig, ReferenceTolerance,
    Target, TestFunction,
};
use mfquad::quadrature::Method;
use mfquad::Point;
use nalgebra::{DMatrix, SymmetricEigen};

/// Gauss–Legendre nodes and weights on `[-1, 1]` from the eigenvalues of the
/// Jacobi matrix.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut j = DMatrix::zeros(n, n);
    for k in 1..n {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut rule: Vec<(f64, f64)> =
        (0..n).map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2))).collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

/// Composite Gauss rule on `[a, b]` with `panels` equal panels.
fn composite(a: f64, b: f64, panels: usize, gl: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let lo = a + p as f64 * h;
            gl.iter().map(move |&(x, w)| (lo + 0.5 * h * (x + 1.0), 0.5 * h * w))
        })
        .collect()
}

const A: f64 = 1.0;
const B: f64 = 0.75;
const SECTOR: f64 = 1.5 * PI;

/// `∫ f` over the ellipse or the disk sector in (mapped) polar coordinates.
fn polar_interior(b: Builtin, f: impl Fn(Point) -> f64) -> f64 {
    let gl = gauss_legendre(30);
    let (sx, sy, theta_max) = match b {
        Builtin::Ellipse => (A, B, 2.0 * PI),
        Builtin::DiskSector => (1.0, 1.0, SECTOR),
        _ => unreachable!(),
    };
    let rs = composite(0.0, 1.0, 24, &gl);
    let ts = composite(0.0, theta_max, 48, &gl);
    let mut sum = 0.0;
    for &(r, wr) in &rs {
        for &(t, wt) in &ts {
            sum += wr * wt * sx * sy * r * f([sx * r * t.cos(), sy * r * t.sin(), 0.0]);
        }
    }
    sum
}

/// `∫ g dσ` over the ellipse (periodic trapezoid) or the sector boundary
/// (composite Gauss on the arc and both radii).
fn polar_boundary(b: Builtin, g: impl Fn(Point) -> f64) -> f64 {
    match b {
        Builtin::Ellipse => {
            let m = 8192;
            (0..m)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / m as f64;
                    g([A * t.cos(), B * t.sin(), 0.0]) * (A * A * t.sin().powi(2) + B * B * t.cos().powi(2)).sqrt()
                })
                .sum::<f64>()
                * 2.0
                * PI
                / m as f64
        }
        Builtin::DiskSector => {
            let gl = gauss_legendre(30);
            let arc: f64 = composite(0.0, SECTOR, 48, &gl).iter().map(|&(t, w)| w * g([t.cos(), t.sin(), 0.0])).sum();
            let radii: f64 = composite(0.0, 1.0, 24, &gl)
                .iter()
                .map(|&(r, w)| w * (g([r, 0.0, 0.0]) + g([0.0, -r, 0.0])))
                .sum();
            arc + radii
        }
        _ => unreachable!(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn golub_welsch_rule_is_exact_for_polynomials() {
    let gl = gauss_legendre(10);
    for k in 0..20 {
        let exact = if k % 2 == 0 { 2.0 / (k + 1) as f64 } else { 0.0 };
        let got: f64 = gl.iter().map(|&(x, w)| w * x.powi(k)).sum();
        assert!((got - exact).abs() <= 1e-14, "x^{k}: {got} vs {exact}");
    }
}

#[test]
fn reference_integrals_agree_with_polar_gauss() {
    for b in [Builtin::Ellipse, Builtin::DiskSector] {
        let d = b.model();
        let f1 = TestFunction::runge(runge_center(b), 2);
        let f2 = TestFunction::franke(2);
        for (name, f) in [("f1", f1), ("f2", f2)] {
            let div = reference_integral(&d, &f, Target::Interior).unwrap();
            let polar = polar_interior(b, |p| f.eval(p).unwrap());
            assert!(rel(div, polar) <= 1e-11, "{b} {name}: {div} vs {polar}");
        }
        let g1 = reference_integral(&d, &f1, Target::Boundary).unwrap();
        let polar = polar_boundary(b, |p| f1.eval(p).unwrap());
        assert!(rel(g1, polar) <= 1e-11, "{b} g1: {g1} vs {polar}");
    }
}

#[test]
fn reference_area_and_surface() {
    let one = TestFunction::constant(1.0, 2);
    let area = reference_integral(&Builtin::Ellipse.model(), &one, Target::Interior).unwrap();
    assert!((area - 0.75 * PI).abs() <= 1e-12);
    let surface =
        reference_integral(&Builtin::Torus.model(), &TestFunction::constant(1.0, 3), Target::Boundary).unwrap();
    assert!((surface - 4.0 * PI * PI * 0.32).abs() <= 1e-11);
}

#[test]
fn franke_corner_value_matches_the_formula() {
    let f = TestFunction::franke(2).eval([-1.0, -1.0, 0.0]).unwrap();
    let direct = 0.75 * (-8.0f64 / 4.0).exp() + 0.75 * (-1.0f64 / 49.0 - 0.1).exp() + 0.5 * (-(49.0f64 + 9.0) / 4.0).exp()
        - 0.2 * (-16.0f64 - 49.0).exp();
    assert!((f - direct).abs() <= 1e-15);
    assert_eq!(franke(0.0, 0.0), f);
}

#[test]
fn runge_reference_is_stable_under_a_larger_subdivision_budget() {
    let d = Builtin::DiskSector.model();
    let f = TestFunction::runge(runge_center(Builtin::DiskSector), 2);
    let base = ReferenceTolerance::default();
    let a = reference_integral_with(&d, &f, Target::Interior, base).unwrap();
    let b = reference_integral_with(&d, &f, Target::Interior, base.with_depth(2 * base.outer.max_depth)).unwrap();
    assert!(rel(a, b) <= 1e-12, "{a} vs {b}");
}

#[test]
fn acceptance_denominators_are_bounded_away_from_zero() {
    for b in [Builtin::Ellipse, Builtin::DiskSector, Builtin::CassiniOval, Builtin::Torus] {
        let d = b.model();
        let f1 = TestFunction::runge(runge_center(b), b.dim());
        let f2 = TestFunction::franke(b.dim());
        for (name, f, target) in [("f1", f1, Target::Interior), ("f2", f2, Target::Interior), ("g1", f1, Target::Boundary)] {
            let i = reference_integral(&d, &f, target).unwrap();
            assert!(i.abs() > 1e-3, "{b} {name}: |I| = {i}");
        }
    }
}

#[test]
fn missing_parametric_boundary_has_no_reference() {
    let d = Builtin::DecoTetrahedron.model();
    assert!(reference_integral(&d, &TestFunction::franke(3), Target::Interior).is_err());
}

fn small_study(seeds: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(Builtin::Ellipse, Method::Bsp, vec![4], vec![0.2, 0.1]);
    cfg.seeds = seeds;
    cfg
}

#[test]
fn study_csv_is_deterministic() {
    let cfg = small_study(2);
    let csv = |cfg: &ExperimentConfig| {
        let mut out = Vec::new();
        run_study(cfg).unwrap().write_csv(&mut out).unwrap();
        out
    };
    assert_eq!(csv(&cfg), csv(&cfg));
}

#[test]
fn single_seed_rms_is_the_error_itself() {
    let report = run_study(&small_study(1)).unwrap();
    for row in &report.rows {
        let cell = report.cells.iter().find(|c| c.q == row.q && c.h == row.h).unwrap();
        assert_eq!(row.seed_count, 1);
        for k in 0..3 {
            assert_eq!(row.e_rms[k], cell.errors[k]);
        }
    }
    assert!(report.eoc(4).iter().all(Option::is_none));
}

#[test]
fn config_round_trip_and_rejections() {
    let cfg = ExperimentConfig::parse("domain = disk-sector\nmethod = mfd\nq_list = 4, 5\nh_list = 0.1, 0.05\nseeds = 3\n")
        .unwrap();
    assert_eq!(cfg.domain, Builtin::DiskSector);
    assert_eq!(cfg.q_list, [4, 5]);
    assert_eq!(cfg.seeds, 3);
    assert!(ExperimentConfig::parse("domain = ellipse\nmethod = bsp\nq_list = 4\nh_list = 0.05, 0.1\n").is_err());
    assert!(ExperimentConfig::parse("domain = ellipse\nmethod = bsp\nq_list = 4\nh_list = 0.1\nseeds = 0\n").is_err());
}
