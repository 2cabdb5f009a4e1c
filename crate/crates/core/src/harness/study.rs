//! RMS-over-seeds convergence studies.

use std::io::Write;

use super::config::ExperimentConfig;
use super::functions::{runge_center, TestFunction};
use super::reference::{reference_integral, Target};
use crate::error::{Error, Result};
use crate::geometry::DomainModel;
use crate::nodegen::advancing_front;
use crate::par;
use crate::quadrature::{compute_weights, QuadratureOptions, QuadratureRule};

/// Errors below this are treated as round-off and left out of EOC fits.
pub const EOC_ERROR_FLOOR: f64 = 1e-14;
/// Minimum number of spacings with usable errors for an EOC fit.
pub const EOC_MIN_POINTS: usize = 3;

/// Names of the three studied integrals, in column order.
pub const STUDIED: [&str; 3] = ["f1", "f2", "g1"];

/// Where the reference values of a study come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceSource {
    /// Adaptive integration over the parametric boundary.
    Parametric,
    /// A rule of the same method at this finer spacing (seed 1).
    SelfComputed { h: f64 },
}

/// Outcome of one `(q, h, seed)` run.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub q: usize,
    pub h: f64,
    pub seed: u64,
    pub n_y: usize,
    pub n_z: usize,
    /// Relative errors of `f1`, `f2` (interior) and `g1` (boundary).
    pub errors: [Option<f64>; 3],
    pub k_w: f64,
    pub k_v: f64,
    pub residual: f64,
    /// `(|Ω| / N_Y)^{1/d}`.
    pub packing_spacing: f64,
    pub failure: Option<String>,
}

/// Aggregate over the seeds of one `(q, h)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub q: usize,
    pub h: f64,
    pub seed_count: usize,
    pub n_y: f64,
    pub n_z: f64,
    pub e_rms: [Option<f64>; 3],
    pub k_w: f64,
    pub k_v: f64,
    pub k_w_max: f64,
    pub k_v_max: f64,
    pub residual_max: f64,
    pub packing_spacing: f64,
    /// Fitted order for this row's `q`, repeated on every row.
    pub eoc: [Option<f64>; 3],
    pub dropped_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub config: ExperimentConfig,
    pub references: [Option<f64>; 3],
    pub reference_source: ReferenceSource,
    pub rows: Vec<StudyRow>,
    pub cells: Vec<CellResult>,
}

impl ErrorReport {
    /// The row for `(q, h)`.
    pub fn row(&self, q: usize, h: f64) -> Option<&StudyRow> {
        self.rows.iter().find(|r| r.q == q && r.h == h)
    }

    /// Fitted orders `[f1, f2, g1]` for `q`.
    pub fn eoc(&self, q: usize) -> [Option<f64>; 3] {
        self.rows.iter().find(|r| r.q == q).map(|r| r.eoc).unwrap_or([None; 3])
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(
            out,
            "method,q,h,seed_count,N_Y,N_Z,e_rms_f1,e_rms_f2,e_rms_g1,K_w,K_v,EOC_f1,EOC_f2,EOC_g1,dropped_reason"
        )?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6e}")).unwrap_or_default();
        for r in &self.rows {
            let dropped = r.dropped_reason.is_some();
            let num = |x: f64| if dropped { String::new() } else { format!("{x:.6e}") };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                self.config.method,
                r.q,
                r.h,
                r.seed_count,
                if dropped { String::new() } else { format!("{:.0}", r.n_y) },
                if dropped { String::new() } else { format!("{:.0}", r.n_z) },
                opt(r.e_rms[0]),
                opt(r.e_rms[1]),
                opt(r.e_rms[2]),
                num(r.k_w),
                num(r.k_v),
                opt(r.eoc[0]),
                opt(r.eoc[1]),
                opt(r.eoc[2]),
                r.dropped_reason.as_deref().unwrap_or("").replace(',', ";"),
            )?;
        }
        Ok(())
    }

    /// Whitespace-separated table for plotting: `h` followed by the RMS
    /// errors, one block per `q` separated by blank lines.
    pub fn write_table(&self, mut out: impl Write) -> Result<()> {
        let nan = |v: Option<f64>| v.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "nan".into());
        for &q in &self.config.q_list {
            writeln!(out, "# q={q} h e_rms_f1 e_rms_f2 e_rms_g1 K_w K_v h_ps")?;
            for r in self.rows.iter().filter(|r| r.q == q && r.dropped_reason.is_none()) {
                writeln!(
                    out,
                    "{} {} {} {} {:.6e} {:.6e} {:.6e}",
                    r.h,
                    nan(r.e_rms[0]),
                    nan(r.e_rms[1]),
                    nan(r.e_rms[2]),
                    r.k_w,
                    r.k_v,
                    r.packing_spacing
                )?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Root mean square of `values`.
pub fn rms(values: &[f64]) -> f64 {
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

/// Least-squares slope of `log e` against `log h`, using only errors above
/// [`EOC_ERROR_FLOOR`]; `None` with fewer than [`EOC_MIN_POINTS`] of them.
pub fn fit_eoc(h: &[f64], e: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        h.iter().zip(e).filter(|(_, &e)| e > EOC_ERROR_FLOOR && e.is_finite()).map(|(&h, &e)| (h.ln(), e.ln())).collect();
    if pts.len() < EOC_MIN_POINTS {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// The studied functions `f1` (Runge), `f2` (Franke/Renka) and `g1 = f1|∂Ω`.
pub fn studied_functions(cfg: &ExperimentConfig) -> [TestFunction; 2] {
    let dim = cfg.domain.dim();
    let center = cfg.x_r.unwrap_or_else(|| runge_center(cfg.domain));
    [TestFunction::runge(center, dim), TestFunction::franke(dim)]
}

fn options(cfg: &ExperimentConfig, q: usize) -> QuadratureOptions {
    let mut o = QuadratureOptions::new(cfg.method, q, cfg.constraint);
    o.solver = cfg.solver;
    o.operator = cfg.operator;
    o
}

/// Builds the rule for one cell.
pub fn cell_rule(d: &DomainModel, cfg: &ExperimentConfig, q: usize, h: f64, seed: u64) -> Result<QuadratureRule> {
    let nodes = advancing_front(d, h, seed)?;
    compute_weights(d, &nodes, &options(cfg, q))
}

/// The three quadrature values `[Σ w f1, Σ w f2, Σ v g1]` of a rule.
fn rule_values(rule: &QuadratureRule, f: &[TestFunction; 2]) -> Result<[f64; 3]> {
    let dot = |w: &[f64], s: Vec<f64>| w.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>();
    Ok([
        dot(&rule.w, f[0].sample(&rule.y)?),
        dot(&rule.w, f[1].sample(&rule.y)?),
        dot(&rule.v, f[0].sample(&rule.z)?),
    ])
}

/// Reference values `[∫f1, ∫f2, ∫g1]`; an entry is `None` when it cannot be
/// computed.
pub fn study_references(d: &DomainModel, cfg: &ExperimentConfig) -> Result<([Option<f64>; 3], ReferenceSource)> {
    let f = studied_functions(cfg);
    if !d.patches().is_empty() {
        let refs = [
            reference_integral(d, &f[0], Target::Interior).ok(),
            reference_integral(d, &f[1], Target::Interior).ok(),
            reference_integral(d, &f[0], Target::Boundary).ok(),
        ];
        return Ok((refs, ReferenceSource::Parametric));
    }
    match cfg.reference_h {
        Some(h) => {
            let q = *cfg.q_list.iter().max().expect("validated non-empty");
            let rule = cell_rule(d, cfg, q, h, 1)?;
            let v = rule_values(&rule, &f)?;
            Ok((v.map(Some), ReferenceSource::SelfComputed { h }))
        }
        None => Ok(([None; 3], ReferenceSource::Parametric)),
    }
}

fn run_cell(d: &DomainModel, cfg: &ExperimentConfig, refs: &[Option<f64>; 3], measure: Option<f64>, q: usize, h: f64, seed: u64) -> CellResult {
    let mut cell = CellResult {
        q,
        h,
        seed,
        n_y: 0,
        n_z: 0,
        errors: [None; 3],
        k_w: f64::NAN,
        k_v: f64::NAN,
        residual: f64::NAN,
        packing_spacing: f64::NAN,
        failure: None,
    };
    let f = studied_functions(cfg);
    let outcome = (|| -> Result<()> {
        let rule = cell_rule(d, cfg, q, h, seed)?;
        cell.n_y = rule.y.len();
        cell.n_z = rule.z.len();
        let values = rule_values(&rule, &f)?;
        for k in 0..3 {
            cell.errors[k] = refs[k].map(|r| ((values[k] - r) / r).abs());
        }
        let l1 = |s: &[f64]| s.iter().map(|t| t.abs()).sum::<f64>();
        let vol = measure.unwrap_or_else(|| rule.w.iter().sum());
        cell.k_w = l1(&rule.w) / vol;
        cell.k_v = match d.measure_boundary() {
            Some(m) => l1(&rule.v) / m,
            None => l1(&rule.v) / rule.v.iter().sum::<f64>(),
        };
        cell.residual = rule.residual_inf;
        cell.packing_spacing = (vol / cell.n_y as f64).powf(1.0 / d.dim() as f64);
        Ok(())
    })();
    if let Err(e) = outcome {
        cell.failure = Some(match e {
            Error::Overdetermined { .. } => format!("overdetermined: {e}"),
            Error::StencilTooLarge { .. } => format!("stencil too large: {e}"),
            other => other.to_string(),
        });
    }
    cell
}

/// Runs every `(q, h, seed)` cell of `cfg` and aggregates RMS errors,
/// stability constants and EOC fits.
pub fn run_study(cfg: &ExperimentConfig) -> Result<ErrorReport> {
    cfg.validate()?;
    let d = cfg.domain.model();
    let (refs, reference_source) = study_references(&d, cfg)?;
    let measure = d.measure_interior().or_else(|| {
        (!d.patches().is_empty())
            .then(|| reference_integral(&d, &TestFunction::constant(1.0, d.dim()), Target::Interior).ok())
            .flatten()
    });
    let mut jobs = Vec::new();
    for &q in &cfg.q_list {
        for &h in &cfg.h_list {
            for seed in 1..=cfg.seeds {
                jobs.push((q, h, seed));
            }
        }
    }
    let cells = par::map_slice(&jobs, |&(q, h, seed)| run_cell(&d, cfg, &refs, measure, q, h, seed));

    let mut rows = Vec::new();
    for &q in &cfg.q_list {
        for &h in &cfg.h_list {
            let group: Vec<&CellResult> = cells.iter().filter(|c| c.q == q && c.h == h).collect();
            let dropped_reason = group.iter().find_map(|c| c.failure.clone());
            let ok: Vec<&&CellResult> = group.iter().filter(|c| c.failure.is_none()).collect();
            let n = ok.len().max(1) as f64;
            let mean = |g: &dyn Fn(&CellResult) -> f64| ok.iter().map(|c| g(c)).sum::<f64>() / n;
            let max = |g: &dyn Fn(&CellResult) -> f64| ok.iter().map(|c| g(c)).fold(f64::NAN, f64::max);
            let mut e_rms = [None; 3];
            if dropped_reason.is_none() {
                for (k, slot) in e_rms.iter_mut().enumerate() {
                    let errs: Option<Vec<f64>> = ok.iter().map(|c| c.errors[k]).collect();
                    *slot = errs.map(|e| rms(&e));
                }
            }
            rows.push(StudyRow {
                q,
                h,
                seed_count: if dropped_reason.is_some() { 0 } else { ok.len() },
                n_y: mean(&|c| c.n_y as f64),
                n_z: mean(&|c| c.n_z as f64),
                e_rms,
                k_w: mean(&|c| c.k_w),
                k_v: mean(&|c| c.k_v),
                k_w_max: max(&|c| c.k_w),
                k_v_max: max(&|c| c.k_v),
                residual_max: max(&|c| c.residual),
                packing_spacing: mean(&|c| c.packing_spacing),
                eoc: [None; 3],
                dropped_reason,
            });
        }
    }
    for &q in &cfg.q_list {
        let mut eoc = [None; 3];
        for (k, slot) in eoc.iter_mut().enumerate() {
            let (hs, es): (Vec<f64>, Vec<f64>) =
                rows.iter().filter(|r| r.q == q).filter_map(|r| r.e_rms[k].map(|e| (r.h, e))).unzip();
            *slot = fit_eoc(&hs, &es);
        }
        for r in rows.iter_mut().filter(|r| r.q == q) {
            r.eoc = eoc;
        }
    }
    Ok(ErrorReport { config: cfg.clone(), references: refs, reference_source, rows, cells })
}
