use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{derive_seed, Exec};
use crate::linalg::C64;
use crate::measurement::SensingMatrix;

/// Empirical (lower) estimate of the isometry constant at sparsity `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RipEstimate {
    pub delta_hat: f64,
    pub s: usize,
    pub trials: usize,
    pub seed: u64,
}

/// Largest `|‖Φ(x₁−x₂)‖²/‖x₁−x₂‖² − 1|` over `trials` random pairs of
/// s-sparse complex vectors.
pub fn empirical_rip(phi: &SensingMatrix, s: usize, trials: usize, seed: u64, exec: Exec) -> Result<RipEstimate> {
    Ok(*empirical_rip_profile(phi, s, trials, seed, exec)?.last().expect("s ≥ 1"))
}

/// Estimates for every sparsity `1..=s_max` from nested trials: trial `t`
/// draws one random support order and entry sequence per vector, and
/// sparsity `s` uses their first `s` elements. Each estimate is the maximum
/// over all sparsities up to `s`, so the profile is nondecreasing.
pub fn empirical_rip_profile(
    phi: &SensingMatrix,
    s_max: usize,
    trials: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<RipEstimate>> {
    let n = phi.cols();
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    if s_max == 0 || s_max > n {
        return Err(Error::InvalidArgument(format!("sparsity {s_max} outside 1..={n}")));
    }
    let per_trial = exec.map_range(trials, |t| trial_deviations(phi, s_max, derive_seed(seed, t as u64)));
    let mut out = Vec::with_capacity(s_max);
    let mut running = 0.0f64;
    for s in 0..s_max {
        let worst = per_trial.iter().map(|dev| dev[s]).fold(0.0, f64::max);
        running = running.max(worst);
        out.push(RipEstimate { delta_hat: running, s: s + 1, trials, seed });
    }
    Ok(out)
}

fn trial_deviations(phi: &SensingMatrix, s_max: usize, seed: u64) -> Vec<f64> {
    let n = phi.cols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let supp1 = sample(&mut rng, n, s_max).into_vec();
    let supp2 = sample(&mut rng, n, s_max).into_vec();
    let mut draw = || C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
    let vals: Vec<(C64, C64)> = (0..s_max).map(|_| (draw(), draw())).collect();

    let a = phi.phi();
    let mut x = vec![C64::new(0.0, 0.0); n];
    let mut y = nalgebra::DVector::<C64>::zeros(a.nrows());
    let mut devs = Vec::with_capacity(s_max);
    for k in 0..s_max {
        let (v1, v2) = vals[k];
        x[supp1[k]] += v1;
        x[supp2[k]] -= v2;
        y.axpy(v1, &a.column(supp1[k]), C64::new(1.0, 0.0));
        y.axpy(-v2, &a.column(supp2[k]), C64::new(1.0, 0.0));
        let xn: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        let dev = if xn > 0.0 { (y.norm_squared() / xn - 1.0).abs() } else { 0.0 };
        devs.push(dev);
    }
    devs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::pauli_basis;
    use std::sync::Arc;

    #[test]
    fn identity_sensing_is_an_isometry() {
        let phi = SensingMatrix::identity(Arc::new(pauli_basis(2)));
        let est = empirical_rip(&phi, 4, 200, 1, Exec::Parallel).unwrap();
        assert!(est.delta_hat <= 1e-12);
        assert_eq!((est.s, est.trials, est.seed), (4, 200, 1));
    }

    #[test]
    fn profile_is_nondecreasing_and_deterministic() {
        let full = crate::measurement::full_config_set(1).unwrap();
        let phi = crate::measurement::build_phi(&full, Arc::new(pauli_basis(1)), Exec::Sequential).unwrap();
        let a = empirical_rip_profile(&phi, 6, 100, 9, Exec::Parallel).unwrap();
        let b = empirical_rip_profile(&phi, 6, 100, 9, Exec::Sequential).unwrap();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0].delta_hat <= w[1].delta_hat));
        assert!(empirical_rip(&phi, 0, 10, 0, Exec::Sequential).is_err());
        assert!(empirical_rip(&phi, 2, 0, 0, Exec::Sequential).is_err());
    }
}
