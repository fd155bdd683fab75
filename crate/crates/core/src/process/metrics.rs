use crate::error::{Error, Result};
use crate::linalg::{eigh, frobenius, sqrt_psd, CMat, C64};
use crate::process::chi::{change_basis, ProcessMatrix};
use crate::process::gates::UnitaryGate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    /// Sum of entry moduli (entrywise on matrices).
    L1,
    /// Euclidean norm on vectors, induced 2-norm (largest singular value) on matrices.
    L2,
    Frobenius,
    /// Sum of singular values.
    Nuclear,
}

pub fn vector_norm(x: &[C64], kind: Norm) -> f64 {
    match kind {
        Norm::L1 => x.iter().map(|z| z.norm()).sum(),
        // a vector is an n×1 matrix with a single singular value
        Norm::L2 | Norm::Frobenius | Norm::Nuclear => {
            x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
        }
    }
}

pub fn matrix_norm(a: &CMat, kind: Norm) -> f64 {
    match kind {
        Norm::L1 => a.iter().map(|z| z.norm()).sum(),
        Norm::Frobenius => frobenius(a),
        Norm::L2 => a.clone().singular_values().iter().copied().fold(0.0, f64::max),
        Norm::Nuclear => a.clone().singular_values().iter().sum(),
    }
}

pub fn checked_norm(a: &CMat, kind: Norm) -> Result<f64> {
    if !crate::linalg::is_finite(a) {
        return Err(Error::NonFinite("norm input"));
    }
    Ok(matrix_norm(a, kind))
}

/// Process purity `Tr(χ²)/d²`.
pub fn purity(chi: &ProcessMatrix) -> f64 {
    let d = chi.dim() as f64;
    chi.chi().iter().map(|z| z.norm_sqr()).sum::<f64>() / (d * d)
}

const PSD_TOL: f64 = 1e-8;
const SPECTRAL_FLOOR: f64 = 1e-12;

/// Fidelity of the trace-normalized Jamiolkowski states,
/// `F = [Tr √(√χ̄_a χ̄_b √χ̄_a)]²`, evaluated in `a`'s basis.
pub fn process_fidelity(a: &ProcessMatrix, b: &ProcessMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "fidelity between d = {} and d = {}",
            a.dim(),
            b.dim()
        )));
    }
    let b = change_basis(b, a.basis().clone())?;
    let na = normalized_psd(a.chi())?;
    let nb = normalized_psd(b.chi())?;
    Ok(state_fidelity(&na, &nb))
}

fn normalized_psd(chi: &CMat) -> Result<CMat> {
    let tr = chi.trace().re;
    if !(tr > 0.0) {
        return Err(Error::InvalidArgument(format!("process matrix trace {tr} is not positive")));
    }
    let n = chi.unscale(tr);
    let (vals, _) = eigh(&n);
    let min = vals[0];
    if min < -PSD_TOL {
        return Err(Error::NotPsd(min));
    }
    Ok(n)
}

/// Uhlmann fidelity of two unit-trace PSD matrices.
pub(crate) fn state_fidelity(a: &CMat, b: &CMat) -> f64 {
    let sa = sqrt_psd(a, SPECTRAL_FLOOR);
    let m = &sa * b * &sa;
    let (vals, _) = eigh(&m);
    let cut = SPECTRAL_FLOOR * vals.iter().copied().fold(0.0, f64::max);
    let root: f64 = vals.iter().filter(|&&l| l > cut).map(|l| l.sqrt()).sum();
    (root * root).clamp(0.0, 1.0)
}

/// Fidelity of a channel with an ideal unitary, `c†χ̄c / d` with
/// `c_α = Tr(Γ_α† U)`.
pub fn unitary_fidelity(gate: &UnitaryGate, chi: &ProcessMatrix) -> Result<f64> {
    if gate.dim() != chi.dim() {
        return Err(Error::Dimension("gate and channel dimensions differ".into()));
    }
    Ok(unitary_overlap(gate.matrix(), chi))
}

pub(crate) fn unitary_overlap(u: &CMat, chi: &ProcessMatrix) -> f64 {
    let coeffs = chi.basis().coefficients(u);
    let m = chi.chi();
    let n = coeffs.len();
    let mut acc = C64::new(0.0, 0.0);
    for a in 0..n {
        let ca = coeffs[a].conj();
        if ca.norm_sqr() == 0.0 {
            continue;
        }
        let mut row = C64::new(0.0, 0.0);
        for b in 0..n {
            row += m[(a, b)] * coeffs[b];
        }
        acc += ca * row;
    }
    let d = chi.dim() as f64;
    (acc.re / (d * chi.trace())).clamp(0.0, 1.0)
}
