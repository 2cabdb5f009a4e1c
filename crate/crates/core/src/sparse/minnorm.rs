//! Minimum 2-norm solutions of underdetermined systems `A x = b`.

use super::cholesky::Envelope;
use super::qr::QrFactor;
use super::SparseMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverPath {
    RankRevealingQr,
    RegularizedNormalEquations,
}

#[derive(Debug, Clone)]
pub struct MinNormSolveReport {
    pub solution: Vec<f64>,
    /// `‖A x − b‖∞`, recomputed from `solution`.
    pub residual_inf: f64,
    pub numeric_rank: Option<usize>,
    /// Diagonal shift used by the normal-equations path; zero for QR.
    pub regularization_omega: f64,
    pub solver_path: SolverPath,
}

/// Smallest shift tried by [`solve_min_norm_chol`]; later attempts double it.
pub const OMEGA_BASE: f64 = 4e-16;
/// Number of doublings of [`OMEGA_BASE`] before giving up.
pub const OMEGA_MAX_DOUBLINGS: u32 = 40;

const REFINEMENT_STEPS: usize = 2;

fn check_inputs(a: &SparseMatrix, b: &[f64]) -> Result<()> {
    if b.len() != a.nrows() {
        return Err(Error::structural(format!(
            "right-hand side has length {} but the matrix has {} rows",
            b.len(),
            a.nrows()
        )));
    }
    if !a.all_finite() || !b.iter().all(|v| v.is_finite()) {
        return Err(Error::data("non-finite entry in the linear system"));
    }
    Ok(())
}

fn residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    let ax = a.spmv(x).expect("dimensions checked");
    b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Iteratively refined solution, where `solve` maps a right-hand side to
/// an approximate minimum-norm solution on the rows flagged in `mask`.
fn refined(a: &SparseMatrix, b: &[f64], mask: Option<&[bool]>, solve: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
    let masked = |mut r: Vec<f64>| {
        if let Some(mask) = mask {
            for (ri, &keep) in r.iter_mut().zip(mask) {
                if !keep {
                    *ri = 0.0;
                }
            }
        }
        r
    };
    let mut x = solve(&masked(b.to_vec()));
    let mut r = masked(residual(a, &x, b));
    let mut best = inf_norm(&r);
    for _ in 0..REFINEMENT_STEPS {
        if best == 0.0 {
            break;
        }
        let dx = solve(&r);
        let cand: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
        let r_new = masked(residual(a, &cand, b));
        let n = inf_norm(&r_new);
        if n >= best {
            break;
        }
        x = cand;
        r = r_new;
        best = n;
    }
    x
}

/// Minimum-norm solution via a rank-revealing QR factorization of `Aᵀ`.
///
/// A row of `A` is treated as dependent when its pivot does not exceed
/// `rank_tol` times the largest row 2-norm of `A`. The solution is
/// `x = Q [R⁻ᵀ b; 0]` over the independent rows, followed by iterative
/// refinement. For an inconsistent system the dependent rows are ignored
/// and the large residual shows up in the report.
pub fn solve_min_norm_qr(a: &SparseMatrix, b: &[f64], rank_tol: f64) -> Result<MinNormSolveReport> {
    check_inputs(a, b)?;
    if !(rank_tol > 0.0) {
        return Err(Error::data(format!("rank tolerance must be positive, got {rank_tol}")));
    }
    let at = a.transpose();
    let max_norm = (0..a.nrows())
        .map(|i| a.row(i).1.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let factor = QrFactor::new(a, &at, rank_tol * max_norm);
    let live = factor.live_rows();
    let x = refined(a, b, Some(&live), |r| factor.solve_min_norm(r));
    let residual_inf = inf_norm(&residual(a, &x, b));
    Ok(MinNormSolveReport {
        solution: x,
        residual_inf,
        numeric_rank: Some(factor.rank()),
        regularization_omega: 0.0,
        solver_path: SolverPath::RankRevealingQr,
    })
}

/// Minimum-norm solution through the regularized normal equations of the
/// second kind, `(A Aᵀ + ωI) y = b`, `x = Aᵀ y`.
///
/// `ω = 4·10⁻¹⁶·2ᵏ` with the smallest `k` for which the Cholesky
/// factorization keeps every pivot at or above `ω/2`.
pub fn solve_min_norm_chol(a: &SparseMatrix, b: &[f64]) -> Result<MinNormSolveReport> {
    check_inputs(a, b)?;
    let at = a.transpose();
    let env = Envelope::gram(a, &at);
    let (omega, factor) = (0..=OMEGA_MAX_DOUBLINGS)
        .find_map(|k| {
            let omega = OMEGA_BASE * 2f64.powi(k as i32);
            env.factor(omega).map(|f| (omega, f))
        })
        .ok_or_else(|| {
            Error::Solver(format!(
                "normal equations not positive definite for any shift up to {:e}",
                OMEGA_BASE * 2f64.powi(OMEGA_MAX_DOUBLINGS as i32)
            ))
        })?;
    let x = refined(a, b, None, |r| at.spmv(&env.unpermute(&factor.solve(&env.permute(r)))).expect("dimensions checked"));
    let residual_inf = inf_norm(&residual(a, &x, b));
    Ok(MinNormSolveReport {
        solution: x,
        residual_inf,
        numeric_rank: None,
        regularization_omega: omega,
        solver_path: SolverPath::RegularizedNormalEquations,
    })
}

/// `‖M c − r‖∞` for the least-squares solution `c` of `M c ≈ r`, from a
/// rank-revealing QR factorization of `M` with one refinement step.
pub fn least_squares_residual(m: &SparseMatrix, r: &[f64], rank_tol: f64) -> Result<f64> {
    check_inputs(m, r)?;
    let mt = m.transpose();
    let max_norm = (0..mt.nrows())
        .map(|i| mt.row(i).1.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let factor = QrFactor::new(&mt, m, rank_tol * max_norm);
    let mut c = factor.solve_least_squares(r);
    let mut res = residual(m, &c, r);
    for _ in 0..REFINEMENT_STEPS {
        let dc = factor.solve_least_squares(&res);
        let cand: Vec<f64> = c.iter().zip(&dc).map(|(a, b)| a + b).collect();
        let res_new = residual(m, &cand, r);
        if inf_norm(&res_new) >= inf_norm(&res) {
            break;
        }
        c = cand;
        res = res_new;
    }
    Ok(inf_norm(&res))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_qr() {
        let r = solve_min_norm_qr(&SparseMatrix::identity(2), &[3.0, 4.0], 1e-15).unwrap();
        assert_eq!(r.solution, vec![3.0, 4.0]);
        assert_eq!(r.residual_inf, 0.0);
        assert_eq!(r.numeric_rank, Some(2));
        assert_eq!(r.regularization_omega, 0.0);
        assert_eq!(r.solver_path, SolverPath::RankRevealingQr);
    }

    #[test]
    fn line_qr() {
        let a = SparseMatrix::from_dense(1, 2, &[1.0, 1.0]).unwrap();
        let r = solve_min_norm_qr(&a, &[2.0], 1e-15).unwrap();
        assert!((r.solution[0] - 1.0).abs() < 1e-15);
        assert!((r.solution[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_chol() {
        let r = solve_min_norm_chol(&SparseMatrix::identity(2), &[1.0, 2.0]).unwrap();
        assert!((r.solution[0] - 1.0).abs() < 1e-9);
        assert!((r.solution[1] - 2.0).abs() < 1e-9);
        assert!(r.regularization_omega > 0.0);
        assert_eq!(r.regularization_omega, OMEGA_BASE);
        assert_eq!(r.solver_path, SolverPath::RegularizedNormalEquations);
    }

    #[test]
    fn line_chol() {
        let a = SparseMatrix::from_dense(1, 2, &[1.0, 1.0]).unwrap();
        let r = solve_min_norm_chol(&a, &[2.0]).unwrap();
        assert!((r.solution[0] - 1.0).abs() < 1e-9);
        assert!((r.solution[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn least_squares_residual_of_inconsistent_system() {
        // x = 1 and x = 3: best fit 2, residual 1
        let m = SparseMatrix::from_dense(2, 1, &[1.0, 1.0]).unwrap();
        assert!((least_squares_residual(&m, &[1.0, 3.0], 1e-15).unwrap() - 1.0).abs() < 1e-12);
        assert!(least_squares_residual(&m, &[2.0, 2.0], 1e-15).unwrap() < 1e-14);
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let a = SparseMatrix::identity(2);
        assert!(matches!(solve_min_norm_qr(&a, &[1.0], 1e-15), Err(Error::Structural(_))));
        assert!(matches!(solve_min_norm_chol(&a, &[1.0]), Err(Error::Structural(_))));
    }

    #[test]
    fn non_finite_is_data_error() {
        let a = SparseMatrix::identity(2);
        assert!(matches!(solve_min_norm_qr(&a, &[1.0, f64::NAN], 1e-15), Err(Error::Data(_))));
        let bad = SparseMatrix::from_dense(1, 1, &[f64::INFINITY]).unwrap();
        assert!(matches!(solve_min_norm_chol(&bad, &[1.0]), Err(Error::Data(_))));
    }

    #[test]
    fn dependent_consistent_rows() {
        // second row duplicates the first; min-norm solution of x1+x2+x3=3 is (1,1,1)
        let a = SparseMatrix::from_dense(2, 3, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let r = solve_min_norm_qr(&a, &[3.0, 3.0], 1e-15).unwrap();
        assert_eq!(r.numeric_rank, Some(1));
        for xi in &r.solution {
            assert!((xi - 1.0).abs() < 1e-14);
        }
        let c = solve_min_norm_chol(&a, &[3.0, 3.0]).unwrap();
        for xi in &c.solution {
            assert!((xi - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn inconsistent_system_reports_residual() {
        let a = SparseMatrix::from_dense(2, 2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        let r = solve_min_norm_qr(&a, &[1.0, 3.0], 1e-15).unwrap();
        assert!(r.residual_inf > 0.5);
    }
}
