//! Affine trace-preservation constraint and the data-consistency set
//! `{χ TP : ‖y − Φ·vec χ‖₂ ≤ ε}`, both in Hermitian real coordinates.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{c, coords_to_herm, herm_to_coords, CMat, RMat, RVec};
use crate::process::{OperatorBasis, ProcessMatrix};

/// `{x : C·x = vec_h(I_d)}` where `C` is the real-linear map
/// `χ ↦ Σ χ_αβ Γ_β†Γ_α`.
#[derive(Debug, Clone)]
pub struct TpConstraint {
    n: usize,
    op: RMat,
    target: RVec,
    /// Orthonormal basis of the row space of `C` (`n × r`).
    row_space: RMat,
    /// Minimum-norm feasible point `C⁺·target`.
    particular: RVec,
}

impl TpConstraint {
    pub fn new(basis: &OperatorBasis) -> Self {
        let d = basis.dim();
        let dd = basis.len();
        let n = dd * dd;
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let el = basis.elements();
        let mut op = RMat::zeros(d * d, n);
        for b in 0..dd {
            for a in 0..dd {
                let out: CMat = match a.cmp(&b) {
                    std::cmp::Ordering::Equal => el[a].adjoint() * &el[a],
                    std::cmp::Ordering::Less => {
                        let p = el[b].adjoint() * &el[a];
                        (&p + p.adjoint()).scale(s2)
                    }
                    std::cmp::Ordering::Greater => {
                        // coordinate (a,b), a > b: χ_ba = i/√2, χ_ab = −i/√2
                        let p = el[a].adjoint() * &el[b];
                        (&p - p.adjoint()) * c(0.0, s2)
                    }
                };
                op.set_column(a + b * dd, &herm_to_coords(&out));
            }
        }
        let target = herm_to_coords(&CMat::identity(d, d));
        let svd = op.clone().svd(true, true);
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let u = svd.u.unwrap();
        let vt = svd.v_t.unwrap();
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > 1e-12 * smax)
            .collect();
        let mut row_space = RMat::zeros(n, keep.len());
        let mut particular = RVec::zeros(n);
        for (j, &i) in keep.iter().enumerate() {
            let v = vt.row(i).transpose();
            row_space.set_column(j, &v);
            let coef = u.column(i).dot(&target) / svd.singular_values[i];
            particular += v * coef;
        }
        Self { n, op, target, row_space, particular }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub(crate) fn particular(&self) -> &RVec {
        &self.particular
    }

    pub(crate) fn row_space(&self) -> &RMat {
        &self.row_space
    }

    /// Euclidean projection onto the affine set.
    pub fn project_coords(&self, x: &RVec) -> RVec {
        let coef = self.row_space.tr_mul(x);
        &self.particular + x - &self.row_space * coef
    }

    /// `‖C·x − vec_h(I)‖`, equal to the Frobenius TP residual.
    pub fn residual_coords(&self, x: &RVec) -> f64 {
        (&self.op * x - &self.target).norm()
    }
}

/// Projects a Hermitian process matrix onto the trace-preserving affine set of
/// its basis.
pub fn project_tp(chi: &ProcessMatrix) -> ProcessMatrix {
    let tp = TpConstraint::new(chi.basis());
    let n = chi.basis().len();
    let x = tp.project_coords(&herm_to_coords(chi.chi()));
    ProcessMatrix::from_parts_unchecked(coords_to_herm(&x, n), chi.basis().clone())
}

/// Data term restricted to the TP affine set, diagonalized once:
/// `A·(x − x_p) − b' = U·S·Wᵀ·(x − x_p) − b'` with `b' = b − A·x_p`.
#[derive(Debug, Clone)]
pub(crate) struct DataTerm {
    tp: Arc<TpConstraint>,
    a: RMat,
    b: RVec,
    /// Right singular vectors (rows), `k × n`, all inside the TP null space.
    w: RMat,
    s: RVec,
    /// `Uᵀ·b'`.
    beta: RVec,
    /// Norm of the part of `b'` no TP point can explain.
    b_perp: f64,
}

impl DataTerm {
    pub fn new(tp: Arc<TpConstraint>, a: RMat, b: RVec) -> Self {
        let vr = tp.row_space();
        let restricted = &a - (&a * vr) * vr.transpose();
        let b_prime = &b - &a * tp.particular();
        let svd = restricted.svd(true, true);
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let u = svd.u.unwrap();
        let vt = svd.v_t.unwrap();
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > 1e-10 * smax && svd.singular_values[i] > 1e-14)
            .collect();
        let k = keep.len();
        let n = a.ncols();
        let mut w = RMat::zeros(k, n);
        let mut s = RVec::zeros(k);
        let mut beta = RVec::zeros(k);
        let mut explained = RVec::zeros(b.len());
        for (j, &i) in keep.iter().enumerate() {
            w.set_row(j, &vt.row(i));
            s[j] = svd.singular_values[i];
            let ui = u.column(i);
            beta[j] = ui.dot(&b_prime);
            explained += ui * beta[j];
        }
        let b_perp = (&b_prime - explained).norm();
        Self { tp, a, b, w, s, beta, b_perp }
    }

    pub fn tp(&self) -> &TpConstraint {
        &self.tp
    }

    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// Smallest residual any TP point can reach.
    pub fn min_residual(&self) -> f64 {
        self.b_perp
    }

    pub fn residual(&self, x: &RVec) -> f64 {
        (&self.a * x - &self.b).norm()
    }

    fn split(&self, v: &RVec) -> (RVec, RVec) {
        let x0 = self.tp.project_coords(v);
        let coef = &self.w * (&x0 - self.tp.particular());
        (x0, coef)
    }

    fn rebuild(&self, x0: RVec, old: &RVec, new: &RVec) -> RVec {
        x0 + self.w.tr_mul(&(new - old))
    }

    /// Euclidean projection onto `{x TP : ‖A·x − b‖ ≤ eps}`. The caller must
    /// ensure `eps ≥ min_residual()`.
    pub fn project_ball(&self, v: &RVec, eps: f64) -> RVec {
        let (x0, coef) = self.split(v);
        let g: RVec = self.s.component_mul(&coef) - &self.beta;
        let gap2 = eps * eps - self.b_perp * self.b_perp;
        let g2 = g.norm_squared();
        if g2 <= gap2.max(0.0) {
            return x0;
        }
        let new = if gap2 <= 0.0 {
            self.beta.component_div(&self.s)
        } else {
            let mu = secular_root(&g, &self.s, gap2.sqrt());
            RVec::from_fn(coef.len(), |i, _| {
                (coef[i] + mu * self.s[i] * self.beta[i]) / (1.0 + mu * self.s[i] * self.s[i])
            })
        };
        self.rebuild(x0, &coef, &new)
    }

    /// Minimum-norm TP least-squares solution.
    pub fn unconstrained_fit(&self) -> RVec {
        let c = self.beta.component_div(&self.s);
        self.tp.particular() + self.w.tr_mul(&c)
    }

    /// `argmin ½‖A·x − b‖² + (ρ/2)‖x − v‖²` over TP points.
    pub fn prox_least_squares(&self, v: &RVec, rho: f64) -> RVec {
        let (x0, coef) = self.split(v);
        let new = RVec::from_fn(coef.len(), |i, _| {
            (self.s[i] * self.beta[i] + rho * coef[i]) / (self.s[i] * self.s[i] + rho)
        });
        self.rebuild(x0, &coef, &new)
    }
}

/// Solves `‖g_i / (1 + μ s_i²)‖ = radius` for `μ ≥ 0` (safeguarded Newton on
/// the reciprocal norm, which is close to linear in `μ`).
fn secular_root(g: &RVec, s: &RVec, radius: f64) -> f64 {
    let eval = |mu: f64| -> (f64, f64) {
        let mut n2 = 0.0;
        let mut dn2 = 0.0;
        for i in 0..g.len() {
            let den = 1.0 + mu * s[i] * s[i];
            let t = g[i] * g[i] / (den * den);
            n2 += t;
            dn2 += -2.0 * t * s[i] * s[i] / den;
        }
        let norm = n2.sqrt();
        // ψ = 1/‖g‖ − 1/radius, ψ' = −(d‖g‖/dμ)/‖g‖²
        let psi = 1.0 / norm - 1.0 / radius;
        let dpsi = -(dn2 / (2.0 * norm)) / (norm * norm);
        (psi, dpsi)
    };
    let mut lo = 0.0;
    let mut hi = f64::INFINITY;
    let mut mu = 0.0;
    for _ in 0..200 {
        let (psi, dpsi) = eval(mu);
        if psi.abs() <= 1e-14 / radius {
            break;
        }
        if psi < 0.0 {
            lo = mu;
        } else {
            hi = mu;
        }
        let mut next = mu - psi / dpsi;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { (2.0 * mu).max(1.0) };
        }
        if (next - mu).abs() <= 1e-15 * mu.max(1e-300) {
            mu = next;
            break;
        }
        mu = next;
    }
    mu
}

pub(crate) fn check_problem_dims(a: &RMat, b: &RVec) -> Result<()> {
    if a.nrows() != b.len() {
        return Err(Error::Dimension(format!(
            "operator has {} rows, data has {}",
            a.nrows(),
            b.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius;
    use crate::process::{check_cptp, chi_from_unitary, gate_basis, pauli_basis, UnitaryGate};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tp_projection_fixes_feasible_points() {
        let p = Arc::new(pauli_basis(2));
        let cz = chi_from_unitary(&UnitaryGate::cz(), p).unwrap();
        let proj = project_tp(&cz);
        assert!(frobenius(&(proj.chi() - cz.chi())) < 1e-10);
    }

    #[test]
    fn tp_projection_of_zero_is_depolarizing() {
        let p = Arc::new(pauli_basis(2));
        let zero = ProcessMatrix::new(CMat::zeros(16, 16), p.clone()).unwrap();
        let proj = project_tp(&zero);
        // minimum-norm solution of Σ χ_αβ Γ_β†Γ_α = I lies in the adjoint's
        // range, which for the Pauli basis gives χ = I/d
        let expected = CMat::identity(16, 16).scale(0.25);
        assert!(frobenius(&(proj.chi() - expected)) < 1e-12);
        assert!((proj.trace() - 4.0).abs() < 1e-12);
        assert!(check_cptp(&proj).tp_residual <= 1e-10);
    }

    #[test]
    fn tp_projection_is_idempotent_in_any_basis() {
        let g = Arc::new(gate_basis(&UnitaryGate::qft(2)));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = crate::linalg::random_hermitian(16, &mut rng);
        let chi = ProcessMatrix::new(h, g).unwrap();
        let once = project_tp(&chi);
        let twice = project_tp(&once);
        assert!(check_cptp(&once).tp_residual <= 1e-10);
        assert!(frobenius(&(once.chi() - twice.chi())) < 1e-10);
    }

    #[test]
    fn ball_projection_lands_on_the_boundary() {
        let p = Arc::new(pauli_basis(1));
        let tp = Arc::new(TpConstraint::new(&p));
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = RMat::from_fn(6, 16, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
        let b = RVec::from_fn(6, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
        let term = DataTerm::new(tp.clone(), a, b);
        let v = RVec::from_fn(16, |_, _| rand::Rng::random_range(&mut rng, -3.0..3.0));
        let eps = term.min_residual() + 0.05;
        let x = term.project_ball(&v, eps);
        assert!((term.residual(&x) - eps).abs() < 1e-9);
        assert!(tp.residual_coords(&x) < 1e-10);
        let again = term.project_ball(&x, eps);
        assert!((again - &x).norm() < 1e-9);
    }
}
