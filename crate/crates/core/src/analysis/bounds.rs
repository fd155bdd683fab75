use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{RMat, RVec};
use crate::measurement::{build_phi, ConfigSet, SensingMatrix};
use crate::process::{OperatorBasis, ProcessMatrix};
use crate::solver::TpConstraint;

use super::spectrum::approx_error_l1;

/// Largest isometry constant for which the recovery guarantee holds.
pub const DELTA_MAX: f64 = std::f64::consts::SQRT_2 - 1.0;

/// `(C1, C2)` of the robust recovery bound at isometry constant `delta`.
pub fn recovery_constants(delta: f64) -> Result<(f64, f64)> {
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::InvalidArgument(format!("isometry constant {delta} must be ≥ 0")));
    }
    if delta >= DELTA_MAX {
        return Err(Error::BoundInapplicable(delta));
    }
    let den = 1.0 - (std::f64::consts::SQRT_2 + 1.0) * delta;
    let c1 = (2.0 + (2.0 * std::f64::consts::SQRT_2 - 2.0) * delta) / den;
    let c2 = 4.0 * (1.0 + delta).sqrt() / den;
    Ok((c1, c2))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub c1: f64,
    pub c2: f64,
    pub bound_value: f64,
    pub s: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// Report-only constant of the configuration-count estimate.
    pub c0_reference: f64,
    /// `⌈C0·s·ln(d⁴/s)⌉`.
    pub m_reference: usize,
    pub approx_error_l1: f64,
}

impl BoundReport {
    pub fn with_c0(mut self, c0: f64, n: usize) -> Self {
        self.c0_reference = c0;
        self.m_reference = m_reference(c0, self.s, n);
        self
    }
}

fn m_reference(c0: f64, s: usize, n: usize) -> usize {
    (c0 * s as f64 * (n as f64 / s as f64).ln()).ceil().max(0.0) as usize
}

/// `‖χ* − χ₀‖₂ ≤ (C1/√s)·‖χ₀(s) − χ₀‖₁ + C2·ε` evaluated for `χ₀`.
pub fn recovery_bound(chi0: &ProcessMatrix, s: usize, epsilon: f64, delta: f64) -> Result<BoundReport> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} must be finite and ≥ 0")));
    }
    let (c1, c2) = recovery_constants(delta)?;
    let n = chi0.chi().len();
    let tail = approx_error_l1(chi0, s.min(n))?;
    Ok(BoundReport {
        c1,
        c2,
        bound_value: c1 / (s as f64).sqrt() * tail + c2 * epsilon,
        s,
        epsilon,
        delta,
        c0_reference: 1.0,
        m_reference: m_reference(1.0, s, n),
        approx_error_l1: tail,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcentrationBounds {
    pub w_u: f64,
    pub w_l: f64,
    pub u: f64,
    pub l: f64,
    pub ratio_ok: bool,
}

pub fn concentration_bounds(
    set: &ConfigSet,
    basis: std::sync::Arc<OperatorBasis>,
    delta: f64,
    exec: Exec,
) -> Result<ConcentrationBounds> {
    concentration_bounds_for(&build_phi(set, basis, exec)?, delta)
}

/// Row-wise weights and the extreme eigenvalues of `Φ†Φ` on the tangent space
/// of Hermitian trace-preserving process matrices.
pub fn concentration_bounds_for(phi: &SensingMatrix, delta: f64) -> Result<ConcentrationBounds> {
    let m = phi.rows();
    if m == 0 {
        return Err(Error::InvalidArgument("empty sensing matrix".into()));
    }
    let max_row = (0..m).map(|i| phi.phi().row(i).norm_squared()).fold(0.0, f64::max);
    let w_u = m as f64 * max_row;
    let w_l = 0.0;

    let a = phi.real_operator();
    let tp = TpConstraint::new(phi.basis());
    let tangent = tangent_basis(&tp);
    let restricted = &a * &tangent;
    let gram = restricted.tr_mul(&restricted);
    let eig = gram.symmetric_eigenvalues();
    let u = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let l = eig.iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
    let ratio_ok = l > 0.0 && u / l < (1.0 + delta) / (1.0 - delta);
    Ok(ConcentrationBounds { w_u, w_l, u, l, ratio_ok })
}

/// Orthonormal basis of the null space of the TP constraint.
fn tangent_basis(tp: &TpConstraint) -> RMat {
    let n = tp.dim();
    let vr = tp.row_space();
    let proj = RMat::identity(n, n) - vr * vr.transpose();
    let eig = proj.symmetric_eigen();
    let cols: Vec<RVec> = (0..n)
        .filter(|&i| eig.eigenvalues[i] > 0.5)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    RMat::from_columns(&cols)
}

/// Probability bound that `Φ` fails the isometry property at sparsity `s`:
/// `2·exp(−2m(δ/2+ε′)²/(w_u−w_ℓ)² + s[ln(eN/s) + ln(12/δ)])`, clamped to
/// `[0, 1]`.
pub fn rip_failure_bound(m: usize, s: usize, delta: f64, eps_margin: f64, w_u: f64, w_l: f64, n: usize) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("δ = {delta} outside (0, 1)")));
    }
    if !(w_u > w_l) || !w_u.is_finite() || !w_l.is_finite() {
        return Err(Error::InvalidArgument(format!("need w_u > w_l, got {w_u} and {w_l}")));
    }
    if s == 0 || s > n || !eps_margin.is_finite() || eps_margin < 0.0 {
        return Err(Error::InvalidArgument(format!("invalid sparsity {s} or margin {eps_margin}")));
    }
    let spread = w_u - w_l;
    let gap = delta / 2.0 + eps_margin;
    let s_f = s as f64;
    let exponent = -2.0 * m as f64 * gap * gap / (spread * spread)
        + s_f * ((std::f64::consts::E * n as f64 / s_f).ln() + (12.0 / delta).ln());
    Ok((2.0 * exponent.exp()).clamp(0.0, 1.0))
}
