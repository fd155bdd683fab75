//! Test channels: a CZ gate decohered to a target purity, a QFT coupled to a
//! small environment, and near-identity quantum memories.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{random_hermitian, spectral_norm, unitary_evolution, unitary_log, kron, CMat};
use crate::process::{
    chi_from_kraus, chi_from_unitary, gate_basis, purity, unitary_fidelity, OperatorBasis, ProcessMatrix,
    UnitaryGate,
};

/// Random system–environment coupling `γ·H̃` acting on `system ⊗ environment`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentCoupling {
    pub gamma: f64,
    /// Hermitian, unit spectral norm.
    pub h_tilde: CMat,
    pub env_dim: usize,
    pub evolution_time: f64,
    pub seed: u64,
}

impl EnvironmentCoupling {
    /// Seeded `H̃` drawn from the Gaussian unitary ensemble and normalized to
    /// unit spectral norm.
    pub fn random(d: usize, env_dim: usize, gamma: f64, evolution_time: f64, seed: u64) -> Result<Self> {
        if env_dim < 2 {
            return Err(Error::InvalidArgument(format!("environment dimension {env_dim} < 2")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) || !(evolution_time >= 0.0 && evolution_time.is_finite()) {
            return Err(Error::InvalidArgument(format!("need γ ≥ 0 and t ≥ 0, got {gamma}, {evolution_time}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(d * env_dim, &mut rng);
        let h_tilde = h.unscale(spectral_norm(&h));
        Ok(Self { gamma, h_tilde, env_dim, evolution_time, seed })
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        Self { gamma, ..self.clone() }
    }

    pub fn with_time(&self, evolution_time: f64) -> Self {
        Self { evolution_time, ..self.clone() }
    }
}

/// Kraus operators `K_e = (I ⊗ ⟨e|) exp(−iHt) (I ⊗ |0⟩)` with
/// `H = H_U ⊗ I + γ·H̃`, where `H_U` generates `U` over the evolution time, so
/// the uncoupled evolution is exactly `U`.
pub fn dilated_kraus(u: &CMat, coupling: &EnvironmentCoupling) -> Result<Vec<CMat>> {
    let d = u.nrows();
    let de = coupling.env_dim;
    if coupling.h_tilde.nrows() != d * de {
        return Err(Error::Dimension(format!(
            "coupling acts on dimension {}, expected {}",
            coupling.h_tilde.nrows(),
            d * de
        )));
    }
    let t = coupling.evolution_time;
    let w = if t == 0.0 {
        kron(u, &CMat::identity(de, de))
    } else {
        let h_sys = unitary_log(u).unscale(t);
        let h = kron(&h_sys, &CMat::identity(de, de)) + coupling.h_tilde.scale(coupling.gamma);
        unitary_evolution(&h, t)
    };
    Ok((0..de)
        .map(|e| CMat::from_fn(d, d, |i, j| w[(i * de + e, j * de)]))
        .collect())
}

fn coupled_channel(gate: &UnitaryGate, coupling: &EnvironmentCoupling, basis: Arc<OperatorBasis>) -> Result<ProcessMatrix> {
    chi_from_kraus(&dilated_kraus(gate.matrix(), coupling)?, basis)
}

/// How the decohered CZ is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoherenceModel {
    /// Coupling to a four-level environment, strength tuned to the purity.
    #[default]
    Environment,
    /// Admixture of the completely depolarizing channel.
    Depolarizing,
}

pub const CZ_ENV_DIM: usize = 4;

/// CZ channel in its gate basis with purity `target_purity`, decohered by a
/// seeded random environment coupling.
pub fn cz_decohered(target_purity: f64) -> Result<ProcessMatrix> {
    cz_decohered_with(target_purity, DecoherenceModel::Environment, 0)
}

pub fn cz_decohered_with(target_purity: f64, model: DecoherenceModel, seed: u64) -> Result<ProcessMatrix> {
    let gate = UnitaryGate::cz();
    let d = gate.dim() as f64;
    if !(target_purity > 1.0 / (d * d) && target_purity <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "target purity {target_purity} outside (1/d², 1]"
        )));
    }
    let basis = Arc::new(gate_basis(&gate));
    match model {
        DecoherenceModel::Depolarizing => {
            let ideal = chi_from_unitary(&gate, basis.clone())?;
            let dep = ProcessMatrix::depolarizing(basis);
            let lambda = bisect(|l| purity(&ideal.mix(&dep, 1.0 - l).expect("same basis")) - target_purity, 0.0, 1.0)?;
            ideal.mix(&dep, 1.0 - lambda)
        }
        DecoherenceModel::Environment => {
            if target_purity == 1.0 {
                return chi_from_unitary(&gate, basis);
            }
            let base = EnvironmentCoupling::random(gate.dim(), CZ_ENV_DIM, 0.0, 1.0, seed)?;
            let f = |g: f64| {
                coupled_channel(&gate, &base.with_gamma(g), basis.clone()).map(|c| purity(&c) - target_purity)
            };
            let gamma = scan_and_bisect(f, 0.0, 10.0, 400, 1e-6)?;
            coupled_channel(&gate, &base.with_gamma(gamma), basis)
        }
    }
}

/// Weight `λ` of the depolarizing component for which the CZ mixture reaches
/// `target_purity`, from the purity quadratic.
pub fn depolarizing_lambda(target_purity: f64, d: usize) -> Result<f64> {
    let n = (d * d) as f64;
    if !(target_purity > 1.0 / n && target_purity <= 1.0) {
        return Err(Error::InvalidArgument(format!("target purity {target_purity} outside (1/d², 1]")));
    }
    // P(λ) = ((1−λ)² n + 2λ(1−λ) + λ²)/n = 1/n + (1−λ)²(n−1)/n
    Ok(1.0 - ((n * target_purity - 1.0) / (n - 1.0)).sqrt())
}

/// Channel of an ideal QFT on two qubits coupled to an environment, in the
/// QFT gate basis.
pub fn qft_env_channel(coupling: &EnvironmentCoupling) -> Result<ProcessMatrix> {
    let gate = UnitaryGate::qft(2);
    coupled_channel(&gate, coupling, Arc::new(gate_basis(&gate)))
}

/// Evolution time at which the QFT channel's fidelity with the ideal gate
/// first drops to `target_fidelity`.
pub fn calibrate_qft_time(gamma: f64, env_dim: usize, seed: u64, target_fidelity: f64) -> Result<EnvironmentCoupling> {
    let gate = UnitaryGate::qft(2);
    let basis = Arc::new(gate_basis(&gate));
    let base = EnvironmentCoupling::random(gate.dim(), env_dim, gamma, 1.0, seed)?;
    let f = |t: f64| {
        let chi = coupled_channel(&gate, &base.with_time(t), basis.clone())?;
        Ok(unitary_fidelity(&gate, &chi)? - target_fidelity)
    };
    let t = scan_and_bisect(f, 0.0, 20.0, 400, 1e-8)?;
    Ok(base.with_time(t))
}

pub const NEAR_IDENTITY_ENV_DIM: usize = 2;

/// Identity on `n` qubits perturbed by an environment coupling of the given
/// strength, in the gate basis of the identity.
pub fn near_identity_channel(n: usize, strength: f64, seed: u64) -> Result<ProcessMatrix> {
    if !(2..=4).contains(&n) {
        return Err(Error::InvalidArgument(format!("near-identity channels need n ∈ 2..=4, got {n}")));
    }
    let gate = UnitaryGate::identity(1 << n);
    let coupling = EnvironmentCoupling::random(gate.dim(), NEAR_IDENTITY_ENV_DIM, strength, 1.0, seed)?;
    coupled_channel(&gate, &coupling, Arc::new(gate_basis(&gate)))
}

/// Coupling strength at which the near-identity channel's fidelity with the
/// identity first drops to `target_fidelity`.
pub fn calibrate_near_identity(n: usize, seed: u64, target_fidelity: f64) -> Result<f64> {
    let gate = UnitaryGate::identity(1 << n);
    let f = |g: f64| Ok(unitary_fidelity(&gate, &near_identity_channel(n, g, seed)?)? - target_fidelity);
    scan_and_bisect(f, 0.0, 10.0, 200, 1e-8)
}

/// Finds the first sign change of `f` (positive at `lo`) on a uniform grid
/// and refines it by bisection to `tol`.
pub(crate) fn scan_and_bisect<F>(f: F, lo: f64, hi: f64, steps: usize, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut a = lo;
    let mut fa = f(a)?;
    if fa <= 0.0 {
        return if fa == 0.0 { Ok(a) } else { Err(Error::InvalidArgument("target not bracketed".into())) };
    }
    let h = (hi - lo) / steps as f64;
    for k in 1..=steps {
        let b = lo + h * k as f64;
        let fb = f(b)?;
        if fb <= 0.0 {
            let (mut a, mut b) = (a, b);
            while b - a > tol * (1.0 + a.abs()) {
                let mid = 0.5 * (a + b);
                if f(mid)? > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return Ok(0.5 * (a + b));
        }
        a = b;
        fa = fb;
    }
    Err(Error::InvalidArgument(format!("target not reached on [{lo}, {hi}] (last gap {fa:.3e})")))
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> Result<f64> {
    // f decreasing with f(a) ≥ 0 ≥ f(b)
    if f(a) < 0.0 || f(b) > 0.0 {
        return Err(Error::InvalidArgument("target not bracketed".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if f(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::sorted_spectrum;
    use crate::process::check_cptp;

    fn assert_cptp(chi: &ProcessMatrix) {
        let r = check_cptp(chi);
        assert!(r.min_eigenvalue >= -1e-8 && r.tp_residual <= 1e-7, "{r:?}");
    }

    #[test]
    fn depolarizing_mixture_matches_closed_form() {
        let chi = cz_decohered_with(0.91, DecoherenceModel::Depolarizing, 0).unwrap();
        assert!((purity(&chi) - 0.91).abs() < 1e-6);
        let lambda = depolarizing_lambda(0.91, 4).unwrap();
        assert!((lambda - 0.049210854079623).abs() < 1e-12);
        // χ₁₁ = (1−λ)·4 + λ/4 in the gate basis
        let expected = (1.0 - lambda) * 4.0 + lambda / 4.0;
        assert!((chi.chi()[(0, 0)].re - expected).abs() < 1e-5);
        assert_cptp(&chi);
        let pure = cz_decohered_with(1.0, DecoherenceModel::Depolarizing, 0).unwrap();
        assert!((purity(&pure) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn purity_range_is_checked() {
        assert!(cz_decohered(1.0 / 16.0).is_err());
        assert!(cz_decohered(1.2).is_err());
        assert!(depolarizing_lambda(0.01, 4).is_err());
    }

    #[test]
    fn environment_model_hits_target_purity() {
        for p in [0.91, 0.62] {
            let chi = cz_decohered(p).unwrap();
            assert!((purity(&chi) - p).abs() < 1e-6);
            assert_cptp(&chi);
        }
        let ideal = cz_decohered(1.0).unwrap();
        assert_eq!(sorted_spectrum(&ideal).unwrap().count_above(0.02), 1);
    }

    #[test]
    fn lower_purity_is_less_sparse() {
        let hi = sorted_spectrum(&cz_decohered(0.91).unwrap()).unwrap().count_above(0.02);
        let lo = sorted_spectrum(&cz_decohered(0.62).unwrap()).unwrap().count_above(0.02);
        assert!((10..=40).contains(&hi), "{hi}");
        assert!(lo > hi);
    }

    #[test]
    fn uncoupled_qft_is_ideal() {
        let c = EnvironmentCoupling::random(4, 2, 0.0, 1.0, 3).unwrap();
        assert!((spectral_norm(&c.h_tilde) - 1.0).abs() < 1e-10);
        let chi = qft_env_channel(&c).unwrap();
        let f = unitary_fidelity(&UnitaryGate::qft(2), &chi).unwrap();
        assert!((f - 1.0).abs() < 1e-10);
        assert!((purity(&chi) - 1.0).abs() < 1e-10);
        let coupled = qft_env_channel(&c.with_gamma(0.5)).unwrap();
        assert!(purity(&coupled) < 1.0 - 1e-6);
        assert_cptp(&coupled);
    }

    #[test]
    fn fidelity_decreases_with_coupling_at_fixed_time() {
        let c = EnvironmentCoupling::random(4, 2, 0.0, 0.5, 1).unwrap();
        let gate = UnitaryGate::qft(2);
        let mut last = 1.0 + 1e-12;
        for k in 0..=10 {
            let f = unitary_fidelity(&gate, &qft_env_channel(&c.with_gamma(0.1 * k as f64)).unwrap()).unwrap();
            assert!(f <= last + 1e-12);
            last = f;
        }
    }

    #[test]
    fn qft_time_calibration_hits_targets() {
        for (gamma, target) in [(0.5, 0.95), (1.0, 0.80), (1.25, 0.70)] {
            let c = calibrate_qft_time(gamma, 2, 0, target).unwrap();
            let chi = qft_env_channel(&c).unwrap();
            let f = unitary_fidelity(&UnitaryGate::qft(2), &chi).unwrap();
            assert!((f - target).abs() < 1e-6, "γ={gamma}: {f}");
            assert_cptp(&chi);
        }
    }

    #[test]
    fn near_identity_examples() {
        let chi = near_identity_channel(2, 0.0, 4).unwrap();
        assert_eq!(sorted_spectrum(&chi).unwrap().count_above(1e-9), 1);
        let g = calibrate_near_identity(2, 4, 0.84).unwrap();
        let chi = near_identity_channel(2, g, 4).unwrap();
        let f = unitary_fidelity(&UnitaryGate::identity(4), &chi).unwrap();
        assert!((f - 0.84).abs() < 1e-6);
        assert_cptp(&chi);
        assert!(near_identity_channel(5, 0.1, 0).is_err());
    }
}
