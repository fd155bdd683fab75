use crate::error::{Error, Result};
use crate::linalg::{asymmetry, checked_hermitian, frobenius, min_eigenvalue, projector, CMat, C64};
use nalgebra::DVector;

/// A density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QState {
    rho: CMat,
}

impl QState {
    pub fn new(rho: CMat) -> Result<Self> {
        let rho = checked_hermitian(&rho, 1e-12)?;
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("state trace {tr} != 1")));
        }
        let min = min_eigenvalue(&rho);
        if min < -1e-12 {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { rho })
    }

    /// Wraps a matrix produced by trusted arithmetic (e.g. a channel output).
    pub(crate) fn from_matrix_unchecked(rho: CMat) -> Self {
        Self { rho }
    }

    pub fn pure(ket: &DVector<C64>) -> Self {
        let norm = ket.norm();
        Self { rho: projector(&(ket / C64::new(norm, 0.0))) }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { rho: CMat::identity(d, d).scale(1.0 / d as f64) }
    }

    pub fn rho(&self) -> &CMat {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn tensor(&self, other: &QState) -> QState {
        QState { rho: self.rho.kronecker(&other.rho) }
    }

    /// Convex combination `w·self + (1−w)·other`.
    pub fn mix(&self, other: &QState, w: f64) -> QState {
        QState { rho: self.rho.scale(w) + other.rho.scale(1.0 - w) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservableKind {
    Projector,
    Expectation,
}

/// A Hermitian measurement operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: CMat,
    kind: ObservableKind,
    label: String,
}

impl Observable {
    pub fn new(label: impl Into<String>, matrix: CMat, kind: ObservableKind) -> Result<Self> {
        let asym = asymmetry(&matrix);
        if asym > 1e-12 {
            return Err(Error::NotHermitian(asym));
        }
        if kind == ObservableKind::Projector {
            let defect = frobenius(&(&matrix * &matrix - &matrix));
            if defect > 1e-10 {
                return Err(Error::InvalidArgument(format!(
                    "projector is not idempotent (defect {defect:.3e})"
                )));
            }
        }
        Ok(Self { matrix, kind, label: label.into() })
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn kind(&self) -> ObservableKind {
        self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Largest absolute eigenvalue, the range of its expectation values.
    pub fn operator_norm(&self) -> f64 {
        let (vals, _) = crate::linalg::eigh(&self.matrix);
        vals.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    #[test]
    fn rejects_bad_states() {
        let mut m = CMat::identity(2, 2);
        assert!(QState::new(m.clone()).is_err()); // trace 2
        m[(1, 1)] = C64::new(-0.5, 0.0);
        m[(0, 0)] = C64::new(1.5, 0.0);
        assert!(matches!(QState::new(m), Err(Error::NotPsd(_))));
    }

    #[test]
    fn projector_must_be_idempotent() {
        let m = CMat::from_element(2, 2, ONE);
        assert!(Observable::new("bad", m, ObservableKind::Projector).is_err());
    }
}
