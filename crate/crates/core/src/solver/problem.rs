use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{coords_to_herm, RMat, RVec};
use crate::measurement::{build_phi, ConfigSet, Dataset, SensingMatrix};
use crate::process::{OperatorBasis, ProcessMatrix};

use super::constraints::{check_problem_dims, DataTerm, TpConstraint};

/// `min ‖vec χ‖₁  s.t.  ‖y − Φ·vec χ‖₂ ≤ ε, χ ⪰ 0, χ trace preserving`.
///
/// `y` and `ε` are in the scaled units of `Φ` (outcomes divided by `√m`).
#[derive(Debug, Clone)]
pub struct RecoveryProblem {
    pub y: Vec<f64>,
    pub phi: SensingMatrix,
    pub epsilon: f64,
}

impl RecoveryProblem {
    pub fn new(y: Vec<f64>, phi: SensingMatrix, epsilon: f64) -> Result<Self> {
        if y.len() != phi.rows() {
            return Err(Error::Dimension(format!("{} outcomes for {} rows of Φ", y.len(), phi.rows())));
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::InvalidArgument(format!("epsilon must be finite and ≥ 0, got {epsilon}")));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("outcomes"));
        }
        Ok(Self { y, phi, epsilon })
    }

    /// Builds `Φ` for `set` and scales the dataset values by `1/√m`.
    /// `epsilon_raw` is in outcome units and is scaled the same way.
    pub fn from_dataset(
        data: &Dataset,
        set: &ConfigSet,
        basis: Arc<OperatorBasis>,
        epsilon_raw: f64,
        exec: Exec,
    ) -> Result<Self> {
        let values = data.values_for(set)?;
        let phi = build_phi(set, basis, exec)?;
        let s = 1.0 / (set.len() as f64).sqrt();
        Self::new(values.iter().map(|v| v * s).collect(), phi, epsilon_raw * s)
    }

    pub fn basis(&self) -> &Arc<OperatorBasis> {
        self.phi.basis()
    }

    pub fn dim(&self) -> usize {
        self.basis().dim()
    }

    /// Real operator and right-hand side acting on Hermitian coordinates.
    pub(crate) fn real_system(&self) -> Result<(RMat, RVec)> {
        let a = self.phi.real_operator();
        let mut b = RVec::zeros(a.nrows());
        for (i, v) in self.y.iter().enumerate() {
            b[i] = *v;
        }
        check_problem_dims(&a, &b)?;
        Ok((a, b))
    }

    pub(crate) fn data_term(&self) -> Result<DataTerm> {
        let (a, b) = self.real_system()?;
        Ok(DataTerm::new(Arc::new(TpConstraint::new(self.basis())), a, b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Initial ADMM penalty; adapted by residual balancing.
    pub penalty: f64,
    pub max_iters: usize,
    /// Per-coordinate tolerances; the stopping test uses `tol·√(d⁴)`.
    pub tol_primal: f64,
    pub tol_dual: f64,
    /// Eigenvalue floor of the PSD projection.
    pub psd_eig_floor: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { penalty: 1.0, max_iters: 100_000, tol_primal: 1e-7, tol_dual: 1e-7, psd_eig_floor: 0.0 }
    }
}

impl SolverOptions {
    pub(crate) fn validate(&self) -> Result<()> {
        let ok = self.penalty > 0.0
            && self.penalty.is_finite()
            && self.max_iters > 0
            && self.tol_primal > 0.0
            && self.tol_dual > 0.0
            && self.psd_eig_floor >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid solver options {self:?}")))
        }
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryResult {
    pub chi_star: ProcessMatrix,
    /// `‖vec χ*‖₁`.
    pub objective: f64,
    /// `‖y − Φ·vec χ*‖₂` in scaled units.
    pub residual: f64,
    pub epsilon: f64,
    pub iterations: usize,
    pub converged: bool,
    pub min_eig: f64,
    pub tp_residual: f64,
}

impl RecoveryResult {
    pub(crate) fn from_coords(
        x: &RVec,
        basis: &Arc<OperatorBasis>,
        data: &DataTerm,
        epsilon: f64,
        iterations: usize,
        converged: bool,
    ) -> Self {
        let n = basis.len();
        let chi_star = ProcessMatrix::from_parts_unchecked(coords_to_herm(x, n), basis.clone());
        let report = crate::process::check_cptp(&chi_star);
        Self {
            objective: super::prox::l1_coords(x, n),
            residual: data.residual(x),
            epsilon,
            iterations,
            converged,
            min_eig: report.min_eigenvalue,
            tp_residual: report.tp_residual,
            chi_star,
        }
    }

    pub fn to_file(&self) -> ResultFile {
        let chi = self.chi_star.chi();
        let rows = |f: fn(&crate::linalg::C64) -> f64| {
            (0..chi.nrows()).map(|i| (0..chi.ncols()).map(|j| f(&chi[(i, j)])).collect()).collect()
        };
        ResultFile {
            chi_re: rows(|z| z.re),
            chi_im: rows(|z| z.im),
            basis: self.chi_star.basis().tag().to_string(),
            objective: self.objective,
            residual: self.residual,
            epsilon: self.epsilon,
            iterations: self.iterations,
            converged: self.converged,
        }
    }
}

/// On-disk form of a reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub chi_re: Vec<Vec<f64>>,
    pub chi_im: Vec<Vec<f64>>,
    pub basis: String,
    pub objective: f64,
    pub residual: f64,
    pub epsilon: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl ResultFile {
    /// Rebuilds the process matrix; the basis is resolved from its tag.
    pub fn process_matrix(&self) -> Result<ProcessMatrix> {
        let n = self.chi_re.len();
        if n == 0 || self.chi_im.len() != n || self.chi_re.iter().chain(&self.chi_im).any(|r| r.len() != n) {
            return Err(Error::Dimension("χ must be square with matching real/imaginary parts".into()));
        }
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n {
            return Err(Error::Dimension(format!("χ has side {n}, not a square of d")));
        }
        let basis = OperatorBasis::from_tag_str(&self.basis, d)?;
        let chi = crate::linalg::CMat::from_fn(n, n, |i, j| crate::linalg::c(self.chi_re[i][j], self.chi_im[i][j]));
        ProcessMatrix::new(chi, basis)
    }
}
