use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{checked_hermitian, eigh, frobenius, CMat, C64, ZERO};
use crate::process::basis::OperatorBasis;
use crate::process::gates::UnitaryGate;
use crate::process::state::QState;

/// Process matrix `χ` of a channel `S(ρ) = Σ χ_αβ Γ_α ρ Γ_β†` in a fixed
/// operator basis.
#[derive(Debug, Clone)]
pub struct ProcessMatrix {
    chi: CMat,
    basis: Arc<OperatorBasis>,
}

/// Physicality diagnostics for a process matrix.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CptpReport {
    pub min_eigenvalue: f64,
    /// `‖Σ χ_αβ Γ_β†Γ_α − I_d‖_F`.
    pub tp_residual: f64,
}

impl CptpReport {
    pub fn is_cptp(&self, eig_tol: f64, tp_tol: f64) -> bool {
        self.min_eigenvalue >= -eig_tol && self.tp_residual <= tp_tol
    }
}

impl ProcessMatrix {
    /// Builds a process matrix, symmetrizing `chi` when its anti-Hermitian part
    /// is below 1e-10 and rejecting it otherwise.
    pub fn new(chi: CMat, basis: Arc<OperatorBasis>) -> Result<Self> {
        let d2 = basis.len();
        if chi.nrows() != d2 || chi.ncols() != d2 {
            return Err(Error::Dimension(format!(
                "chi is {}x{}, basis needs {d2}x{d2}",
                chi.nrows(),
                chi.ncols()
            )));
        }
        let chi = checked_hermitian(&chi, 1e-10)?;
        Ok(Self { chi, basis })
    }

    pub(crate) fn from_parts_unchecked(chi: CMat, basis: Arc<OperatorBasis>) -> Self {
        Self { chi, basis }
    }

    pub fn chi(&self) -> &CMat {
        &self.chi
    }

    pub fn basis(&self) -> &Arc<OperatorBasis> {
        &self.basis
    }

    /// Hilbert-space dimension `d`.
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn trace(&self) -> f64 {
        self.chi.trace().re
    }

    /// Column-major `vec(χ)` of length `d⁴`.
    pub fn vec(&self) -> Vec<C64> {
        vec_chi(&self.chi)
    }

    pub fn from_vec(v: &[C64], basis: Arc<OperatorBasis>) -> Result<Self> {
        let chi = unvec_chi(v)?;
        Self::new(chi, basis)
    }

    /// Identity channel in `basis`.
    pub fn identity(basis: Arc<OperatorBasis>) -> Self {
        let d = basis.dim();
        chi_from_unitary(&UnitaryGate::identity(d), basis).expect("identity is trace preserving")
    }

    /// Completely depolarizing channel `ρ ↦ Tr(ρ)·I/d`, i.e. `χ = I/d` in any
    /// orthonormal basis.
    pub fn depolarizing(basis: Arc<OperatorBasis>) -> Self {
        let d = basis.dim();
        let d2 = basis.len();
        Self { chi: CMat::identity(d2, d2).scale(1.0 / d as f64), basis }
    }

    /// `w·self + (1−w)·other`; both must share a basis.
    pub fn mix(&self, other: &ProcessMatrix, w: f64) -> Result<ProcessMatrix> {
        same_basis(self, other)?;
        Ok(Self {
            chi: self.chi.scale(w) + other.chi.scale(1.0 - w),
            basis: self.basis.clone(),
        })
    }

    pub fn scaled(&self, factor: f64) -> ProcessMatrix {
        Self { chi: self.chi.scale(factor), basis: self.basis.clone() }
    }

    /// `Σ χ_αβ Γ_β†Γ_α`; equals `I_d` for trace-preserving channels.
    pub fn tp_map(&self) -> CMat {
        tp_map(&self.chi, &self.basis)
    }

    /// Kraus operators from the eigendecomposition of `χ` (eigenvalues below
    /// `tol` dropped).
    pub fn kraus(&self, tol: f64) -> Vec<CMat> {
        let (vals, vecs) = eigh(&self.chi);
        let d = self.dim();
        let mut out = Vec::new();
        for k in (0..vals.len()).rev() {
            if vals[k] <= tol {
                continue;
            }
            let w = vals[k].sqrt();
            let mut op = CMat::zeros(d, d);
            for (a, g) in self.basis.elements().iter().enumerate() {
                let coeff = vecs[(a, k)] * w;
                if coeff != ZERO {
                    op += g * coeff;
                }
            }
            out.push(op);
        }
        out
    }
}

pub(crate) fn same_basis(a: &ProcessMatrix, b: &ProcessMatrix) -> Result<()> {
    if Arc::ptr_eq(&a.basis, &b.basis) || a.basis == b.basis {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "basis mismatch: {} vs {}",
            a.basis.tag(),
            b.basis.tag()
        )))
    }
}

pub fn vec_chi(chi: &CMat) -> Vec<C64> {
    // nalgebra storage is column-major
    chi.as_slice().to_vec()
}

pub fn unvec_chi(v: &[C64]) -> Result<CMat> {
    let n = (v.len() as f64).sqrt().round() as usize;
    if n * n != v.len() || n == 0 {
        return Err(Error::Dimension(format!(
            "vector of length {} is not a square matrix",
            v.len()
        )));
    }
    Ok(CMat::from_column_slice(n, n, v))
}

pub(crate) fn tp_map(chi: &CMat, basis: &OperatorBasis) -> CMat {
    let d = basis.dim();
    let mut out = CMat::zeros(d, d);
    for (b, gb) in basis.elements().iter().enumerate() {
        let mut acc = CMat::zeros(d, d);
        for (a, ga) in basis.elements().iter().enumerate() {
            let w = chi[(a, b)];
            if w != ZERO {
                acc += ga * w;
            }
        }
        out += gb.adjoint() * acc;
    }
    out
}

/// `χ_αβ = Σ_e c_α^e (c_β^e)*` with `K_e = Σ_α c_α^e Γ_α`.
pub fn chi_from_kraus(kraus: &[CMat], basis: Arc<OperatorBasis>) -> Result<ProcessMatrix> {
    let d = basis.dim();
    if kraus.is_empty() {
        return Err(Error::InvalidArgument("empty Kraus set".into()));
    }
    if kraus.iter().any(|k| k.nrows() != d || k.ncols() != d) {
        return Err(Error::Dimension(format!("Kraus operators must be {d}x{d}")));
    }
    let mut completeness = CMat::zeros(d, d);
    for k in kraus {
        completeness += k.adjoint() * k;
    }
    let residual = frobenius(&(completeness - CMat::identity(d, d)));
    if residual > 1e-8 {
        return Err(Error::NotTP { residual });
    }
    let d2 = basis.len();
    let mut chi = CMat::zeros(d2, d2);
    for k in kraus {
        let coeffs = DVector::from_vec(basis.coefficients(k));
        chi += &coeffs * coeffs.adjoint();
    }
    Ok(ProcessMatrix { chi, basis })
}

pub fn chi_from_unitary(gate: &UnitaryGate, basis: Arc<OperatorBasis>) -> Result<ProcessMatrix> {
    if gate.dim() != basis.dim() {
        return Err(Error::Dimension(format!(
            "gate acts on d = {}, basis on d = {}",
            gate.dim(),
            basis.dim()
        )));
    }
    chi_from_kraus(std::slice::from_ref(gate.matrix()), basis)
}

/// `S(ρ) = Σ χ_αβ Γ_α ρ Γ_β†`.
pub fn apply_channel(chi: &ProcessMatrix, rho: &QState) -> Result<QState> {
    let d = chi.dim();
    if rho.dim() != d {
        return Err(Error::Dimension(format!(
            "state has d = {}, channel d = {d}",
            rho.dim()
        )));
    }
    Ok(QState::from_matrix_unchecked(apply_raw(chi, rho.rho())))
}

pub(crate) fn apply_raw(chi: &ProcessMatrix, rho: &CMat) -> CMat {
    let d = chi.dim();
    let elements = chi.basis.elements();
    let left: Vec<CMat> = elements.iter().map(|g| g * rho).collect();
    let mut out = CMat::zeros(d, d);
    for (b, gb) in elements.iter().enumerate() {
        let mut acc = CMat::zeros(d, d);
        for (a, la) in left.iter().enumerate() {
            let w = chi.chi[(a, b)];
            if w != ZERO {
                acc += la * w;
            }
        }
        out += acc * gb.adjoint();
    }
    crate::linalg::hermitian_part(&out)
}

/// Re-expresses `χ` in `target`: `χ' = T χ T†`, `T_ab = Tr(Γ'_a† Γ_b)`.
pub fn change_basis(chi: &ProcessMatrix, target: Arc<OperatorBasis>) -> Result<ProcessMatrix> {
    if target.dim() != chi.dim() {
        return Err(Error::Dimension(format!(
            "target basis has d = {}, chi has d = {}",
            target.dim(),
            chi.dim()
        )));
    }
    if Arc::ptr_eq(&target, &chi.basis) || *target == *chi.basis {
        return Ok(ProcessMatrix { chi: chi.chi.clone(), basis: target });
    }
    let t = transition_matrix(&chi.basis, &target);
    let out = &t * &chi.chi * t.adjoint();
    Ok(ProcessMatrix { chi: crate::linalg::hermitian_part(&out), basis: target })
}

pub(crate) fn transition_matrix(from: &OperatorBasis, to: &OperatorBasis) -> CMat {
    let n = from.len();
    CMat::from_fn(n, n, |a, b| crate::linalg::inner(to.element(a), from.element(b)))
}

pub fn check_cptp(chi: &ProcessMatrix) -> CptpReport {
    let (vals, _) = eigh(&chi.chi);
    let d = chi.dim();
    CptpReport {
        min_eigenvalue: vals.iter().copied().fold(f64::INFINITY, f64::min),
        tp_residual: frobenius(&(chi.tp_map() - CMat::identity(d, d))),
    }
}
