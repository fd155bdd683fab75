use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{trace_product, CMat, RMat, C64};
use crate::measurement::config::{ConfigSet, Configuration};
use crate::process::chi::apply_raw;
use crate::process::{OperatorBasis, ProcessMatrix};

/// Linear map `y = Φ·vec(χ)` with rows `Tr(Γ_α ρ_i Γ_β† M_i)/√m`, columns in
/// column-major `vec` order (`α + β·d²`).
#[derive(Debug, Clone)]
pub struct SensingMatrix {
    phi: CMat,
    basis: Arc<OperatorBasis>,
    configs: Option<Arc<ConfigSet>>,
}

impl SensingMatrix {
    pub fn phi(&self) -> &CMat {
        &self.phi
    }

    pub fn basis(&self) -> &Arc<OperatorBasis> {
        &self.basis
    }

    pub fn configs(&self) -> Option<&Arc<ConfigSet>> {
        self.configs.as_ref()
    }

    pub fn rows(&self) -> usize {
        self.phi.nrows()
    }

    pub fn cols(&self) -> usize {
        self.phi.ncols()
    }

    /// `Φ = I_{d⁴}`: an exact isometry, used as a reference sensing operator.
    pub fn identity(basis: Arc<OperatorBasis>) -> Self {
        let n = basis.len() * basis.len();
        Self { phi: CMat::identity(n, n), basis, configs: None }
    }

    pub fn from_matrix(phi: CMat, basis: Arc<OperatorBasis>) -> Result<Self> {
        let n = basis.len() * basis.len();
        if phi.ncols() != n {
            return Err(Error::Dimension(format!("Φ needs {n} columns, got {}", phi.ncols())));
        }
        Ok(Self { phi, basis, configs: None })
    }

    /// Keeps the listed rows and rescales from `1/√m_parent` to `1/√m`.
    pub fn select_rows(&self, rows: &[usize]) -> Result<SensingMatrix> {
        let m_parent = self.rows() as f64;
        let m = rows.len() as f64;
        if rows.iter().any(|&r| r >= self.rows()) || rows.is_empty() {
            return Err(Error::InvalidArgument("row selection out of range".into()));
        }
        let scale = (m_parent / m).sqrt();
        let phi = CMat::from_fn(rows.len(), self.cols(), |i, j| self.phi[(rows[i], j)] * scale);
        let configs = match &self.configs {
            Some(c) => Some(Arc::new(c.subset(rows)?)),
            None => None,
        };
        Ok(Self { phi, basis: self.basis.clone(), configs })
    }

    pub fn apply(&self, chi: &ProcessMatrix) -> Vec<C64> {
        let v = nalgebra::DVector::from_vec(chi.vec());
        (&self.phi * v).iter().copied().collect()
    }

    /// Real-linear operator on the Hermitian real coordinates of `χ`
    /// (see [`crate::linalg`]). Rows are the real parts of the outputs, followed
    /// by the imaginary parts when those are not identically zero.
    pub fn real_operator(&self) -> RMat {
        let dd = self.basis.len();
        let m = self.rows();
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let mut re = RMat::zeros(m, dd * dd);
        let mut im = RMat::zeros(m, dd * dd);
        for i in 0..m {
            for b in 0..dd {
                for a in 0..dd {
                    let k = a + b * dd;
                    let (col, val) = match a.cmp(&b) {
                        std::cmp::Ordering::Equal => (k, self.phi[(i, k)]),
                        std::cmp::Ordering::Less => {
                            let kt = b + a * dd;
                            (k, (self.phi[(i, k)] + self.phi[(i, kt)]) * inv)
                        }
                        std::cmp::Ordering::Greater => {
                            // coordinate (a,b) with a > b carries Im χ_ba
                            let kt = b + a * dd;
                            let v = (self.phi[(i, kt)] - self.phi[(i, k)]) * C64::new(0.0, inv);
                            (k, v)
                        }
                    };
                    re[(i, col)] = val.re;
                    im[(i, col)] = val.im;
                }
            }
        }
        if im.iter().all(|v| v.abs() < 1e-13) {
            re
        } else {
            let mut out = RMat::zeros(2 * m, dd * dd);
            out.rows_mut(0, m).copy_from(&re);
            out.rows_mut(m, m).copy_from(&im);
            out
        }
    }
}

fn phi_row(cfg: &Configuration, basis: &OperatorBasis, scale: f64) -> Vec<C64> {
    let dd = basis.len();
    let rho = cfg.input.rho();
    let obs = cfg.observable.matrix();
    let left: Vec<CMat> = basis.elements().iter().map(|g| g * rho).collect();
    let right: Vec<CMat> = basis.elements().iter().map(|g| g.adjoint() * obs).collect();
    let mut row = vec![C64::new(0.0, 0.0); dd * dd];
    for (b, rb) in right.iter().enumerate() {
        for (a, la) in left.iter().enumerate() {
            row[a + b * dd] = trace_product(la, rb) * scale;
        }
    }
    row
}

/// Builds `Φ` for `set` in `basis`; rows are computed independently and may be
/// evaluated in parallel.
pub fn build_phi(set: &ConfigSet, basis: Arc<OperatorBasis>, exec: Exec) -> Result<SensingMatrix> {
    if set.is_empty() {
        return Err(Error::InvalidArgument("empty configuration set".into()));
    }
    if set.dim() != Some(basis.dim()) {
        return Err(Error::Dimension(format!(
            "configurations have d = {:?}, basis d = {}",
            set.dim(),
            basis.dim()
        )));
    }
    let m = set.len();
    let scale = 1.0 / (m as f64).sqrt();
    let rows = exec.map_slice(set.configs(), |cfg| phi_row(cfg, &basis, scale));
    let n = basis.len() * basis.len();
    let phi = CMat::from_fn(m, n, |i, j| rows[i][j]);
    Ok(SensingMatrix { phi, basis, configs: Some(Arc::new(set.clone())) })
}

/// Direct expectations `y_i = Tr(S(ρ_i) M_i)` without the `1/√m` factor.
pub fn predict_expectations(chi: &ProcessMatrix, set: &ConfigSet) -> Result<Vec<f64>> {
    if set.dim() != Some(chi.dim()) && !set.is_empty() {
        return Err(Error::Dimension("configuration and channel dimensions differ".into()));
    }
    set.configs()
        .iter()
        .map(|cfg| {
            let out = apply_raw(chi, cfg.input.rho());
            let y = trace_product(&out, cfg.observable.matrix());
            if y.im.abs() > 1e-8 {
                return Err(Error::ComplexExpectation(y.im));
            }
            Ok(y.re)
        })
        .collect()
}
