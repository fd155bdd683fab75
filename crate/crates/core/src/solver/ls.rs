//! Least-squares fit over CPTP process matrices: the full-data baseline.

use crate::error::{Error, Result};
use crate::linalg::RVec;

use super::prox::{project_psd_coords, require_finite};
use super::problem::{RecoveryProblem, RecoveryResult, SolverOptions};

const POLISH_ITERS: usize = 2000;

/// `min ‖y − Φ·vec χ‖₂  s.t.  χ ⪰ 0, χ trace preserving`. The problem's
/// `epsilon` is ignored and reported back unchanged.
pub fn solve_constrained_ls(problem: &RecoveryProblem, opts: &SolverOptions) -> Result<RecoveryResult> {
    opts.validate()?;
    let m = problem.phi.rows();
    if m == 0 || problem.y.is_empty() {
        return Err(Error::InvalidArgument("least squares needs at least one configuration".into()));
    }
    let n = problem.basis().len();
    let dim = n * n;
    if m < dim / 4 {
        log::warn!("least-squares fit with {m} configurations for {dim} unknowns is underdetermined");
    }
    let data = problem.data_term()?;
    let floor = opts.psd_eig_floor;
    let tol_p = opts.tol_primal * (dim as f64).sqrt();
    let tol_d = opts.tol_dual * (dim as f64).sqrt();

    // A full-rank fit that is already positive is the constrained optimum.
    if data.rank() == dim - data.tp().row_space().ncols() {
        let x = data.unconstrained_fit();
        if project_psd_coords(&x, n, floor).1 >= floor - 1e-10 {
            return Ok(RecoveryResult::from_coords(&x, problem.basis(), &data, problem.epsilon, 0, true));
        }
    }

    let mut rho = opts.penalty;
    let mut z = project_psd_coords(&data.prox_least_squares(&RVec::zeros(dim), rho), n, floor).0;
    let mut u = RVec::zeros(dim);
    let mut x = z.clone();
    let mut converged = false;
    let mut iters = 0;
    while iters < opts.max_iters {
        iters += 1;
        x = data.prox_least_squares(&(&z - &u), rho);
        let z_old = std::mem::replace(&mut z, project_psd_coords(&(&x + &u), n, floor).0);
        let diff = &x - &z;
        u += &diff;
        let r = diff.norm();
        let s = rho * (&z - &z_old).norm();
        require_finite(&z)?;
        if r <= tol_p && s <= tol_d {
            converged = true;
            break;
        }
        if iters % 10 == 0 {
            if r > 10.0 * s {
                rho *= 2.0;
                u /= 2.0;
            } else if s > 10.0 * r {
                rho /= 2.0;
                u *= 2.0;
            }
        }
    }

    let tp = data.tp();
    for _ in 0..POLISH_ITERS {
        let (p, min_eig) = project_psd_coords(&x, n, floor);
        if min_eig >= -1e-9 {
            break;
        }
        x = tp.project_coords(&p);
    }
    Ok(RecoveryResult::from_coords(&x, problem.basis(), &data, problem.epsilon, iters, converged))
}
