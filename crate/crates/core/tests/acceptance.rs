//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::sync::OnceLock;
use std::time::Instant;

use mfquad::bspline::make_space;
use mfquad::geometry::{BoundingBox, Builtin};
use mfquad::harness::{run_study, ErrorReport, ExperimentConfig, TestFunction};
use mfquad::mfd::{monomials, polyharmonic_weights, Functional, Operator};
use mfquad::nodegen::{advancing_front, halton, make_x, NeighborIndex};
use mfquad::quadrature::{
    assemble_operators, compute_weights, ConstraintKind, ConstraintSpec, Method, QuadratureOptions, QuadratureRule,
};
use mfquad::sparse::solve_min_norm_qr;
use mfquad::{Point, TripletMatrix};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LADDER_2D: [f64; 3] = [0.1, 0.05, 0.025];
const LADDER_3D: [f64; 3] = [0.1, 0.07, 0.05];
const UNIT: BoundingBox = BoundingBox { lo: [0.0; 3], hi: [1.0; 3] };

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn study(cell: &'static OnceLock<ErrorReport>, make: impl FnOnce() -> ExperimentConfig) -> &'static ErrorReport {
    cell.get_or_init(|| run_study(&make()).expect("study runs"))
}

fn sector_mfd() -> &'static ErrorReport {
    static R: OnceLock<ErrorReport> = OnceLock::new();
    study(&R, || {
        let mut c = ExperimentConfig::new(Builtin::DiskSector, Method::Mfd, vec![4, 5], LADDER_2D.to_vec());
        c.seeds = 4;
        c
    })
}

fn sector_bsp() -> &'static ErrorReport {
    static R: OnceLock<ErrorReport> = OnceLock::new();
    study(&R, || {
        let mut c = ExperimentConfig::new(Builtin::DiskSector, Method::Bsp, vec![4, 5], LADDER_2D.to_vec());
        c.seeds = 4;
        c
    })
}

fn sector_elliptic() -> &'static ErrorReport {
    static R: OnceLock<ErrorReport> = OnceLock::new();
    study(&R, || {
        let mut c = ExperimentConfig::new(Builtin::DiskSector, Method::Mfd, vec![6], LADDER_2D.to_vec());
        c.seeds = 4;
        c.operator = Operator::Laplacian;
        c
    })
}

fn torus(method: Method) -> &'static ErrorReport {
    static MFD: OnceLock<ErrorReport> = OnceLock::new();
    static BSP: OnceLock<ErrorReport> = OnceLock::new();
    let cell = if method == Method::Mfd { &MFD } else { &BSP };
    study(cell, || {
        let mut c = ExperimentConfig::new(Builtin::Torus, method, vec![4], LADDER_3D.to_vec());
        c.seeds = 2;
        c
    })
}

/// `EOC(f_k)` of every `q` in the report with its threshold `q − 1 − 0.5`.
fn eoc_check(r: &ErrorReport, k: usize) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for &q in &r.config.q_list {
        let e = r.eoc(q)[k];
        let need = q as f64 - 1.5;
        ok &= e.is_some_and(|e| e >= need);
        parts.push(format!("q={q} EOC={} (need >= {need:.1})", fmt_opt(e)));
    }
    (ok, parts.join(", "))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |v| format!("{v:.2}"))
}

/// `‖Lᵀw − Bᵀv‖∞` and the constraint residuals, recomputed from freshly
/// assembled operators instead of the solver's system matrix.
fn recomputed_residual(d: &mfquad::DomainModel, nodes: &mfquad::NodeSet, opts: &QuadratureOptions, rule: &QuadratureRule) -> (f64, f64) {
    let (l, b) = assemble_operators(d, nodes, opts).unwrap();
    let ltw = l.transpose().spmv(&rule.w).unwrap();
    let btv = b.transpose().spmv(&rule.v).unwrap();
    let mut res = ltw.iter().zip(&btv).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
    let mut bmax = 0.0f64;
    let rows = ConstraintSpec::new(opts.constraint, d).unwrap().rows(d.dim(), &rule.y, &rule.z, &nodes.normals).unwrap();
    for r in rows {
        let s: f64 = r.over_y.iter().zip(&rule.w).map(|(a, c)| a * c).sum::<f64>()
            + r.over_z.iter().zip(&rule.v).map(|(a, c)| a * c).sum::<f64>();
        res = res.max((s - r.rhs).abs());
        bmax = bmax.max(r.rhs.abs());
    }
    (res, bmax)
}

fn criterion_1() -> Outcome {
    let cases: [(Builtin, Method, f64); 9] = [
        (Builtin::Ellipse, Method::Mfd, 0.1),
        (Builtin::Ellipse, Method::Bsp, 0.1),
        (Builtin::DiskSector, Method::Mfd, 0.05),
        (Builtin::CassiniOval, Method::Bsp, 0.05),
        (Builtin::CassiniOval, Method::Mfd, 0.1),
        (Builtin::Ellipsoid, Method::Bsp, 0.15),
        (Builtin::LShape3D, Method::Mfd, 0.2),
        (Builtin::Torus, Method::Bsp, 0.1),
        (Builtin::DecoTetrahedron, Method::Bsp, 0.1),
    ];
    let mut ok = true;
    let mut worst_res = 0.0f64;
    let mut worst_sum = 0.0f64;
    for (dom, method, h) in cases {
        let d = dom.model();
        let nodes = advancing_front(&d, h, 1).unwrap();
        let kind = mfquad::harness::default_constraint(dom);
        let opts = QuadratureOptions::new(method, 4, kind);
        let rule = compute_weights(&d, &nodes, &opts).unwrap();
        let (res, bmax) = recomputed_residual(&d, &nodes, &opts, &rule);
        let scaled = res / (1.0 + bmax);
        worst_res = worst_res.max(scaled);
        ok &= scaled <= 1e-9;
        if kind == ConstraintKind::BoundaryConstant {
            let m = d.measure_boundary().unwrap();
            let rel = (rule.v.iter().sum::<f64>() - m).abs() / m;
            worst_sum = worst_sum.max(rel);
            ok &= rel <= 1e-9;
        }
    }
    outcome(
        ok,
        format!("9 rules on all 7 domains: max ‖Ax−b‖∞/(1+‖b‖∞) = {worst_res:.2e} (<= 1e-9), max |Σv − |∂Ω||/|∂Ω| = {worst_sum:.2e} (<= 1e-9)"),
    )
}

fn criterion_2() -> Outcome {
    let (ok, s) = eoc_check(sector_mfd(), 0);
    outcome(ok, format!("disk sector MFD, 4 seeds, f1: {s}"))
}

fn criterion_3() -> Outcome {
    let (ok, s) = eoc_check(sector_bsp(), 0);
    outcome(ok, format!("disk sector BSP, 4 seeds, f1: {s}"))
}

fn criterion_4() -> Outcome {
    let div = sector_mfd().eoc(5)[0];
    let ell = sector_elliptic().eoc(6)[0];
    let gap = div.zip(ell).map(|(a, b)| a - b);
    outcome(
        gap.is_some_and(|g| g >= 1.5),
        format!(
            "EOC(f1) divergence q=5 {} vs elliptic q=6 {}: gap {} (need >= 1.5)",
            fmt_opt(div),
            fmt_opt(ell),
            fmt_opt(gap)
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for method in [Method::Mfd, Method::Bsp] {
        let (pass, s) = eoc_check(torus(method), 1);
        ok &= pass;
        parts.push(format!("{method}: {s}"));
    }
    outcome(ok, format!("torus f2, 2 seeds: {}", parts.join("; ")))
}

fn criterion_6() -> Outcome {
    let reports = [sector_mfd(), sector_bsp(), sector_elliptic(), torus(Method::Mfd), torus(Method::Bsp)];
    let (mut kw, mut kv) = (0.0f64, 0.0f64);
    let mut complete = true;
    for r in reports {
        let h = *r.config.h_list.last().unwrap();
        for &q in &r.config.q_list {
            match r.row(q, h) {
                Some(row) if row.dropped_reason.is_none() => {
                    kw = kw.max(row.k_w_max);
                    kv = kv.max(row.k_v_max);
                }
                _ => complete = false,
            }
        }
    }
    outcome(
        complete && kw <= 5.0 && kv <= 1.2,
        format!("smallest h of criteria 2-5, all seeds: max K_w = {kw:.3} (<= 5), max K_v = {kv:.4} (<= 1.2)"),
    )
}

fn criterion_7() -> Outcome {
    let d = Builtin::DecoTetrahedron.model();
    let opts = QuadratureOptions::new(Method::Bsp, 4, ConstraintKind::FundamentalSolution);
    let f2 = TestFunction::franke(3);
    let g = TestFunction::fundamental(d.fundamental_center(), 3);
    let mut values = Vec::new();
    let mut g_value = f64::NAN;
    for h in [0.1, 0.07, 0.05] {
        let nodes = advancing_front(&d, h, 1).unwrap();
        let rule = match compute_weights(&d, &nodes, &opts) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("pipeline failed at h={h}: {e}")),
        };
        if h == 0.1 {
            g_value = rule.v.iter().zip(&rule.z).zip(&nodes.normals).map(|((v, &z), &n)| v * g.eval_at(z, Some(n)).unwrap()).sum();
        }
        values.push(rule.integrate_interior(|p| f2.eval(p).unwrap()));
    }
    let reference = values[2];
    let (e1, e2) = ((values[0] - reference).abs(), (values[1] - reference).abs());
    let shrink = e1 / e2;
    outcome(
        (g_value - 1.0).abs() <= 1e-2 && shrink >= 2.0,
        format!(
            "deco-tetrahedron BSP q=4: Σv ∂νΦ = {g_value:.12} (1 within 1e-2); f2 error vs h=0.05 self-reference {e1:.3e} -> {e2:.3e}, shrink {shrink:.1}x (need >= 2)"
        ),
    )
}

/// `‖x − x*‖₂ / ‖x*‖₂` against the dense pseudoinverse solution for 50 random
/// consistent systems.
fn pseudoinverse_agreement() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(10..=200);
        let m = rng.random_range(1..n);
        let mut t = TripletMatrix::new(m, n);
        for i in 0..m {
            for _ in 0..rng.random_range(1..=6) {
                t.push(i, rng.random_range(0..n), rng.random_range(-1.0..1.0));
            }
        }
        let a = t.finalize().unwrap();
        let x0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b = a.spmv(&x0).unwrap();
        let dense = DMatrix::from_row_slice(m, n, &a.to_dense());
        let oracle = dense.pseudo_inverse(1e-12).unwrap() * nalgebra::DVector::from_column_slice(&b);
        let x = solve_min_norm_qr(&a, &b, 1e-12).unwrap().solution;
        let diff = x.iter().zip(oracle.iter()).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        worst = worst.max(diff / oracle.norm().max(1e-300));
    }
    worst
}

fn knn_matches_brute_force() -> bool {
    let pts = halton(5, 1000, 3, &UNIT);
    let idx = NeighborIndex::new(pts.clone(), 3);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    (0..50).all(|_| {
        let p = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
        let mut all: Vec<(f64, usize)> =
            pts.iter().enumerate().map(|(j, x)| ((0..3).map(|k| (x[k] - p[k]).powi(2)).sum(), j)).collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let brute: Vec<usize> = all[..30].iter().map(|t| t.1).collect();
        idx.knn(p, 30).unwrap() == brute
    })
}

fn partition_of_unity() -> f64 {
    let d = Builtin::Ellipsoid.model();
    let space = make_space(&d, 0.1, 4, 4.0).unwrap();
    let bb = space.bounding_box();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    (0..500)
        .map(|_| {
            let p = [0, 1, 2].map(|k| rng.random_range(bb.lo[k]..bb.hi[k]));
            (space.eval_local(p, None).unwrap().iter().map(|t| t.1).sum::<f64>() - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Largest relative defect of `∂x₀` weights on monomials of degree `< q`.
fn mfd_reproduction() -> f64 {
    let mut worst = 0.0f64;
    let pts = halton(11, 60, 2, &UNIT);
    for q in [3, 4, 5] {
        let center = [0.5, 0.5, 0.0];
        let w = polyharmonic_weights(center, &pts, Functional::Partial(0), q, 2).unwrap();
        let scale: f64 = w.iter().map(|t| t.abs()).sum();
        for e in monomials(q, 2) {
            let mono = |p: &Point| p[0].powi(e[0] as i32) * p[1].powi(e[1] as i32);
            let exact = if e[0] == 0 { 0.0 } else { e[0] as f64 * center[0].powi(e[0] as i32 - 1) * center[1].powi(e[1] as i32) };
            let got: f64 = w.iter().zip(&pts).map(|(wi, p)| wi * mono(p)).sum();
            worst = worst.max((got - exact).abs() / scale);
        }
    }
    worst
}

fn rule_is_deterministic() -> bool {
    let d = Builtin::CassiniOval.model();
    let run = || {
        let nodes = advancing_front(&d, 0.1, 3).unwrap();
        let x = make_x(&d, 0.1, 3, 1.6).unwrap();
        let r = compute_weights(&d, &nodes, &QuadratureOptions::new(Method::Mfd, 4, ConstraintKind::BoundaryConstant)).unwrap();
        (nodes, x, r.w, r.v)
    };
    let (a, b) = (run(), run());
    a.0 == b.0
        && a.1 == b.1
        && a.2.iter().zip(&b.2).all(|(p, q)| p.to_bits() == q.to_bits())
        && a.3.iter().zip(&b.3).all(|(p, q)| p.to_bits() == q.to_bits())
}

fn criterion_8() -> Outcome {
    let pinv = pseudoinverse_agreement();
    let knn = knn_matches_brute_force();
    let pu = partition_of_unity();
    let repro = mfd_reproduction();
    let det = rule_is_deterministic();
    outcome(
        pinv <= 1e-8 && knn && pu <= 1e-12 && repro <= 1e-9 && det,
        format!(
            "pseudoinverse agreement {pinv:.1e} (<= 1e-8), knn exact {knn}, partition of unity {pu:.1e} (<= 1e-12), \
             MFD reproduction {repro:.1e} (<= 1e-9), bit-identical reruns {det}"
        ),
    )
}

fn main() {
    // `cargo test -- --list` and similar probes must not run the suite.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("exactness residual", criterion_1),
        ("2D convergence, MFD", criterion_2),
        ("2D convergence, BSP", criterion_3),
        ("elliptic vs divergence", criterion_4),
        ("3D convergence, torus", criterion_5),
        ("stability constants", criterion_6),
        ("moment-free path", criterion_7),
        ("property suites", criterion_8),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{verdict}] {name}: {} ({:.1}s)", k + 1, o.detail, t.elapsed().as_secs_f64());
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
