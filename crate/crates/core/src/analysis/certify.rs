use serde::Serialize;

use crate::error::{Error, Result};
use crate::process::chi::same_basis;
use crate::process::ProcessMatrix;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certification {
    /// Configuration counts of the estimates, in the order given.
    pub ms: Vec<usize>,
    /// `‖vec χ_{m_{j+1}} − vec χ_{m_j}‖₁` for consecutive estimates.
    pub increments: Vec<f64>,
    pub threshold: f64,
    /// The last increment is below `threshold`.
    pub certified: bool,
}

/// ℓ1 increments between estimates obtained from growing configuration
/// counts; they shrink toward zero when the sparsity assumption holds.
pub fn sparsity_certification(estimates: &[(usize, ProcessMatrix)], threshold: f64) -> Result<Certification> {
    if estimates.len() < 2 {
        return Err(Error::InvalidArgument("certification needs at least two estimates".into()));
    }
    let mut increments = Vec::with_capacity(estimates.len() - 1);
    for w in estimates.windows(2) {
        same_basis(&w[0].1, &w[1].1)?;
        increments.push((w[1].1.chi() - w[0].1.chi()).iter().map(|z| z.norm()).sum());
    }
    let certified = *increments.last().expect("nonempty") < threshold;
    Ok(Certification { ms: estimates.iter().map(|e| e.0).collect(), increments, threshold, certified })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_hermitian;
    use crate::process::{gate_basis, pauli_basis, UnitaryGate};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    #[test]
    fn identical_estimates_have_zero_increment() {
        let p = Arc::new(pauli_basis(2));
        let chi = ProcessMatrix::depolarizing(p);
        let cert = sparsity_certification(&[(16, chi.clone()), (32, chi)], 1e-3).unwrap();
        assert_eq!(cert.increments, vec![0.0]);
        assert!(cert.certified);
    }

    #[test]
    fn unrelated_matrices_are_not_certified() {
        let p = Arc::new(pauli_basis(1));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let est: Vec<(usize, ProcessMatrix)> = (0..3)
            .map(|k| (8 << k, ProcessMatrix::new(random_hermitian(4, &mut rng), p.clone()).unwrap()))
            .collect();
        assert!(!sparsity_certification(&est, 1e-3).unwrap().certified);
    }

    #[test]
    fn basis_mismatch_and_short_input_fail() {
        let a = ProcessMatrix::identity(Arc::new(pauli_basis(2)));
        let b = ProcessMatrix::identity(Arc::new(gate_basis(&UnitaryGate::cz())));
        assert!(sparsity_certification(&[(16, a.clone()), (32, b)], 1e-3).is_err());
        assert!(sparsity_certification(&[(16, a)], 1e-3).is_err());
    }
}
