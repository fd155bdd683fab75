//! Consensus ADMM for the ℓ1 recovery program.
//!
//! Three blocks share one consensus variable `z`: the ℓ1 prox, the PSD cone,
//! and the intersection of the trace-preserving affine set with the residual
//! ball (projected exactly through a precomputed SVD, see
//! [`super::constraints`]).

use crate::error::{Error, Result};
use crate::linalg::RVec;

use super::anderson::Anderson;
use super::constraints::DataTerm;
use super::problem::{RecoveryProblem, RecoveryResult, SolverOptions};
use super::prox::{project_psd_coords, prox_l1_coords, require_finite};

const STALL_RELATIVE: f64 = 1e-12;
const STALL_ITERS: usize = 1000;
const BALANCE_EVERY: usize = 10;
const BALANCE_RATIO: f64 = 10.0;
const POLISH_ITERS: usize = 2000;
const RELAXATION: f64 = 1.6;
/// Eigenvalue slack below the floor accepted for a converged result.
const CERTIFIED_EIG: f64 = 1e-8;
/// Iterations between polish attempts once the tolerances are met.
const CHECK_EVERY: usize = 500;
const ANDERSON_MEMORY: usize = 10;
/// An accelerated step is undone when it grows the fixed-point residual by
/// more than this factor.
const SAFEGUARD: f64 = 2.0;

pub fn solve_cqpt(problem: &RecoveryProblem, opts: &SolverOptions) -> Result<RecoveryResult> {
    opts.validate()?;
    let data = problem.data_term()?;
    let basis = problem.basis();
    let n = basis.len();
    let dim = n * n;
    let eps = problem.epsilon;
    let floor = opts.psd_eig_floor;
    if eps < data.min_residual() * (1.0 - 1e-9) - 1e-14 {
        return Err(Error::Infeasible(format!(
            "no trace-preserving χ reaches residual {eps:.3e}; the minimum is {:.3e}",
            data.min_residual()
        )));
    }
    let eps = eps.max(data.min_residual());
    let tol_p = opts.tol_primal * (dim as f64).sqrt();
    let tol_d = opts.tol_dual * (dim as f64).sqrt();
    let mut next_check = 0;
    let mut polisher = Polisher { data: &data, eps, n, floor, interior: None };
    let mut polished = None;

    let z0 = feasibility_start(&data, eps, n, floor, tol_p)?;
    let mut rho = opts.penalty;
    // state (z, u₀, u₁, u₂) of the splitting, stacked
    let mut w = RVec::zeros(4 * dim);
    w.rows_mut(0, dim).copy_from(&z0);
    let mut x_ball = z0;
    let mut aa = Anderson::new(ANDERSON_MEMORY);
    let mut fallback: Option<(RVec, f64)> = None;
    let mut stalled = 0usize;
    let mut converged = false;
    let mut iters = 0;

    while iters < opts.max_iters {
        iters += 1;
        let step = admm_step(&w, &data, eps, n, floor, rho);
        require_finite(&step.next)?;
        let residual = (&step.next - &w).norm();
        if let Some((plain, reference)) = &fallback {
            if residual > SAFEGUARD * reference {
                w = plain.clone();
                fallback = None;
                aa.reset();
                continue;
            }
        }
        x_ball = step.x_ball;
        let (r, s) = (step.r, rho * 3f64.sqrt() * step.dz);

        if r <= tol_p && s <= tol_d && iters >= next_check {
            // converged only once the polished point passes the PSD check
            if let Ok(out) = polisher.polish(&x_ball) {
                if project_psd_coords(&out, n, floor).1 >= floor - CERTIFIED_EIG {
                    converged = true;
                    polished = Some(out);
                    break;
                }
            }
            next_check = iters + CHECK_EVERY;
        }
        let z_norm = step.next.rows(0, dim).norm();
        if step.dz <= STALL_RELATIVE * z_norm.max(1e-300) && r > 10.0 * tol_p {
            stalled += 1;
            if stalled >= STALL_ITERS {
                return Err(Error::Infeasible(format!(
                    "splitting iterates stalled with constraint violation {r:.3e}"
                )));
            }
        } else {
            stalled = 0;
        }
        let mut next = step.next;
        if iters % BALANCE_EVERY == 0 {
            let scale = if r > BALANCE_RATIO * s {
                2.0
            } else if s > BALANCE_RATIO * r {
                0.5
            } else {
                1.0
            };
            if scale != 1.0 {
                rho *= scale;
                next.rows_mut(dim, 3 * dim).unscale_mut(scale);
                aa.reset();
                fallback = None;
                w = next;
                continue;
            }
        }
        let accelerated = aa.step(&w, &next);
        fallback = Some((next, residual));
        w = accelerated;
    }

    let out = polished.unwrap_or_else(|| polisher.polish(&x_ball).unwrap_or_else(|psd| psd));
    Ok(RecoveryResult::from_coords(&out, basis, &data, problem.epsilon, iters, converged))
}

struct Step {
    next: RVec,
    x_ball: RVec,
    r: f64,
    dz: f64,
}

/// One over-relaxed consensus iteration from the stacked state `(z, u₀, u₁, u₂)`.
fn admm_step(w: &RVec, data: &DataTerm, eps: f64, n: usize, floor: f64, rho: f64) -> Step {
    let dim = n * n;
    let z = w.rows(0, dim).into_owned();
    let u: Vec<RVec> = (1..4).map(|k| w.rows(k * dim, dim).into_owned()).collect();
    let x = [
        prox_l1_coords(&(&z - &u[0]), n, 1.0 / rho),
        project_psd_coords(&(&z - &u[1]), n, floor).0,
        data.project_ball(&(&z - &u[2]), eps),
    ];
    let relaxed: Vec<RVec> = x.iter().map(|xk| xk * RELAXATION + &z * (1.0 - RELAXATION)).collect();
    let z_new = (&relaxed[0] + &u[0] + &relaxed[1] + &u[1] + &relaxed[2] + &u[2]) / 3.0;
    let mut next = RVec::zeros(4 * dim);
    let mut r2 = 0.0;
    for k in 0..3 {
        r2 += (&x[k] - &z_new).norm_squared();
        next.rows_mut((k + 1) * dim, dim).copy_from(&(&u[k] + &relaxed[k] - &z_new));
    }
    let dz = (&z_new - &z).norm();
    next.rows_mut(0, dim).copy_from(&z_new);
    let [_, _, x_ball] = x;
    Step { next, x_ball, r: r2.sqrt(), dz }
}

/// Alternating projections between the PSD cone and TP ∩ ball. Returns a
/// point of the intersection (approximately), or `Infeasible` when the
/// iterates stop moving while the two sets remain apart.
fn feasibility_start(data: &DataTerm, eps: f64, n: usize, floor: f64, tol: f64) -> Result<RVec> {
    let mut x = data.project_ball(&RVec::zeros(n * n), eps);
    let mut stalled = 0;
    for _ in 0..(10 * STALL_ITERS) {
        let (p, min_eig) = project_psd_coords(&x, n, floor);
        if min_eig >= floor - 1e-12 {
            return Ok(x);
        }
        let next = data.project_ball(&p, eps);
        let gap = (&p - &next).norm();
        let moved = (&next - &x).norm();
        require_finite(&next)?;
        if gap <= tol {
            return Ok(next);
        }
        if moved <= STALL_RELATIVE * next.norm().max(1e-300) && gap > 10.0 * tol {
            stalled += 1;
            if stalled >= STALL_ITERS {
                return Err(Error::Infeasible(format!(
                    "PSD cone and data-consistent TP set stay {gap:.3e} apart"
                )));
            }
        } else {
            stalled = 0;
        }
        x = next;
    }
    Ok(x)
}

struct Polisher<'a> {
    data: &'a DataTerm,
    eps: f64,
    n: usize,
    floor: f64,
    interior: Option<Option<(RVec, f64)>>,
}

impl Polisher<'_> {
    /// Pushes a TP ∩ ball point into the PSD cone: alternating projections
    /// first, then, if eigenvalues below the floor remain, the shortest mix
    /// with a strictly positive feasible point. Without one the PSD
    /// projection comes back as `Err`, trading a small residual excess for
    /// a physical estimate.
    fn polish(&mut self, x: &RVec) -> std::result::Result<RVec, RVec> {
        let (n, floor) = (self.n, self.floor);
        let mut x = x.clone();
        let mut min_eig = f64::NEG_INFINITY;
        for _ in 0..POLISH_ITERS {
            let (p, m) = project_psd_coords(&x, n, floor);
            min_eig = m;
            if min_eig >= floor - 1e-9 {
                return Ok(x);
            }
            x = self.data.project_ball(&p, self.eps);
        }
        min_eig = min_eig.min(project_psd_coords(&x, n, floor).1);
        let (data, eps) = (self.data, self.eps);
        let Some((c, c_eig)) = self.interior.get_or_insert_with(|| interior_point(data, eps, n, floor)) else {
            return Err(project_psd_coords(&x, n, floor).0);
        };
        // λ_min is concave, so the mix is at least (1−t)·λ_min(x) + t·λ_min(c)
        let t = (floor - min_eig) / (*c_eig - min_eig);
        Ok(x * (1.0 - t) + &*c * t)
    }
}

/// A TP ∩ ball point whose eigenvalues all exceed `floor`, trying decreasing
/// margins relative to the mean eigenvalue.
fn interior_point(data: &DataTerm, eps: f64, n: usize, floor: f64) -> Option<(RVec, f64)> {
    let mean_eig = (n as f64).sqrt() / n as f64;
    for frac in [0.1, 0.01, 0.001] {
        let target = floor + frac * mean_eig;
        let mut x = data.project_ball(&RVec::zeros(n * n), eps);
        for _ in 0..POLISH_ITERS {
            let (p, m) = project_psd_coords(&x, n, target);
            if m > floor + 0.5 * frac * mean_eig {
                return Some((x, m));
            }
            x = data.project_ball(&p, eps);
        }
    }
    None
}
