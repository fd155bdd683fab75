use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{CMat, ZERO};
use crate::process::ProcessMatrix;

pub const DEFAULT_THRESHOLDS: [f64; 2] = [0.01, 0.02];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdCount {
    pub threshold: f64,
    pub count: usize,
}

/// Entry moduli of `χ` sorted in decreasing order, relative to the largest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparsitySpectrum {
    pub magnitudes: Vec<f64>,
    pub threshold_counts: Vec<ThresholdCount>,
}

impl SparsitySpectrum {
    /// Number of entries strictly above `threshold`.
    pub fn count_above(&self, threshold: f64) -> usize {
        self.magnitudes.partition_point(|&m| m > threshold)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,relative_magnitude\n");
        for (i, m) in self.magnitudes.iter().enumerate() {
            out.push_str(&format!("{i},{m:.16e}\n"));
        }
        out
    }
}

pub fn sorted_spectrum(chi: &ProcessMatrix) -> Result<SparsitySpectrum> {
    sorted_spectrum_with(chi, &DEFAULT_THRESHOLDS)
}

pub fn sorted_spectrum_with(chi: &ProcessMatrix, thresholds: &[f64]) -> Result<SparsitySpectrum> {
    let mut mags: Vec<f64> = chi.chi().iter().map(|z| z.norm()).collect();
    if mags.iter().any(|m| !m.is_finite()) {
        return Err(Error::NonFinite("process matrix"));
    }
    mags.sort_by(|a, b| b.total_cmp(a));
    let top = mags[0];
    if top == 0.0 {
        return Err(Error::InvalidArgument("spectrum of the zero matrix".into()));
    }
    for m in mags.iter_mut() {
        *m /= top;
    }
    let mut spec = SparsitySpectrum { magnitudes: mags, threshold_counts: Vec::new() };
    spec.threshold_counts = thresholds
        .iter()
        .map(|&threshold| ThresholdCount { threshold, count: spec.count_above(threshold) })
        .collect();
    Ok(spec)
}

/// Indices (column-major) of the `s` largest-modulus entries, ties broken by
/// index order.
fn top_support(chi: &CMat, s: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..chi.len()).collect();
    idx.sort_by(|&a, &b| chi[b].norm().total_cmp(&chi[a].norm()).then(a.cmp(&b)));
    idx.truncate(s);
    idx
}

/// Best s-sparse approximation `χ₀(s)`: the `s` largest-modulus entries are
/// kept, everything else is zeroed. When `s` separates an entry from its
/// conjugate partner the result is not Hermitian.
pub fn s_sparse_approx(chi: &ProcessMatrix, s: usize) -> Result<ProcessMatrix> {
    let n = chi.chi().len();
    if s == 0 || s > n {
        return Err(Error::InvalidArgument(format!("sparsity {s} outside 1..={n}")));
    }
    let mut out = CMat::from_element(chi.chi().nrows(), chi.chi().ncols(), ZERO);
    for k in top_support(chi.chi(), s) {
        out[k] = chi.chi()[k];
    }
    Ok(ProcessMatrix::from_parts_unchecked(out, chi.basis().clone()))
}

/// `‖vec χ₀(s) − vec χ₀‖₁`: the sum of all moduli outside the top `s`.
pub fn approx_error_l1(chi: &ProcessMatrix, s: usize) -> Result<f64> {
    let approx = s_sparse_approx(chi, s)?;
    Ok((approx.chi() - chi.chi()).iter().map(|z| z.norm()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_hermitian;
    use crate::process::{chi_from_unitary, gate_basis, pauli_basis, UnitaryGate};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    #[test]
    fn ideal_cz_spectrum_is_one_sparse() {
        let g = Arc::new(gate_basis(&UnitaryGate::cz()));
        let cz = chi_from_unitary(&UnitaryGate::cz(), g).unwrap();
        let spec = sorted_spectrum(&cz).unwrap();
        assert_eq!(spec.magnitudes.len(), 256);
        assert_eq!(spec.magnitudes[0], 1.0);
        assert!(spec.magnitudes[1] < 1e-12);
        assert_eq!(spec.threshold_counts[0], ThresholdCount { threshold: 0.01, count: 1 });
        assert!(spec.to_csv().starts_with("index,relative_magnitude\n0,1.0000000000000000e0\n"));
    }

    #[test]
    fn spectrum_depends_on_basis() {
        let cz_g = chi_from_unitary(&UnitaryGate::cz(), Arc::new(gate_basis(&UnitaryGate::cz()))).unwrap();
        let cz_p = chi_from_unitary(&UnitaryGate::cz(), Arc::new(pauli_basis(2))).unwrap();
        let a = sorted_spectrum(&cz_g).unwrap();
        let b = sorted_spectrum(&cz_p).unwrap();
        // CZ = (II + IZ + ZI − ZZ)/2 has four equal Pauli coefficients
        assert_eq!(b.count_above(0.5), 16);
        assert_eq!(a.count_above(0.5), 1);
        assert!(b.magnitudes.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn zero_matrix_has_no_spectrum() {
        let p = Arc::new(pauli_basis(1));
        let z = ProcessMatrix::new(CMat::zeros(4, 4), p).unwrap();
        assert!(sorted_spectrum(&z).is_err());
    }

    #[test]
    fn full_and_one_sparse_approximations() {
        let p = Arc::new(pauli_basis(1));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let chi = ProcessMatrix::new(random_hermitian(4, &mut rng), p.clone()).unwrap();
        let full = s_sparse_approx(&chi, 16).unwrap();
        assert_eq!(full.chi(), chi.chi());
        let id = ProcessMatrix::identity(p);
        assert_eq!(approx_error_l1(&id, 1).unwrap(), 0.0);
        assert!(s_sparse_approx(&id, 0).is_err());
        assert!(s_sparse_approx(&id, 17).is_err());
    }

    #[test]
    fn hard_thresholding_beats_every_two_support() {
        let p = Arc::new(pauli_basis(1));
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let chi = ProcessMatrix::new(random_hermitian(4, &mut rng), p.clone()).unwrap();
            let mags: Vec<f64> = chi.chi().iter().map(|z| z.norm()).collect();
            let total: f64 = mags.iter().sum();
            let mut best_l1 = f64::INFINITY;
            let mut best_l2 = f64::INFINITY;
            for i in 0..16 {
                for j in (i + 1)..16 {
                    best_l1 = best_l1.min(total - mags[i] - mags[j]);
                    let l2: f64 = (0..16).filter(|&k| k != i && k != j).map(|k| mags[k] * mags[k]).sum();
                    best_l2 = best_l2.min(l2);
                }
            }
            let approx = s_sparse_approx(&chi, 2).unwrap();
            let diff = approx.chi() - chi.chi();
            assert!((approx_error_l1(&chi, 2).unwrap() - best_l1).abs() < 1e-12);
            assert!((diff.norm_squared() - best_l2).abs() < 1e-12);
        }
    }
}
