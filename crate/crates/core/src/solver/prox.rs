use crate::error::{Error, Result};
use crate::linalg::{checked_hermitian, coords_to_herm, eigh, herm_to_coords, spectral_map, CMat, RVec, C64};

/// Complex soft threshold: every entry shrinks in modulus by `tau`, keeping its
/// phase; entries with modulus below `tau` become zero.
pub fn soft_threshold(v: &[C64], tau: f64) -> Vec<C64> {
    assert!(tau >= 0.0, "threshold must be nonnegative");
    v.iter()
        .map(|&z| {
            let m = z.norm();
            if m <= tau {
                C64::new(0.0, 0.0)
            } else {
                z * ((m - tau) / m)
            }
        })
        .collect()
}

/// Frobenius-nearest PSD matrix: negative eigenvalues are clamped to zero.
/// The input must be Hermitian within 1e-8.
pub fn project_psd(chi: &CMat) -> Result<CMat> {
    let h = checked_hermitian(chi, 1e-8)?;
    Ok(project_psd_unchecked(&h, 0.0))
}

pub(crate) fn project_psd_unchecked(h: &CMat, floor: f64) -> CMat {
    let (vals, vecs) = eigh(h);
    if vals[0] >= floor {
        return h.clone();
    }
    spectral_map(&vals, &vecs, |l| l.max(floor))
}

/// PSD projection in Hermitian real coordinates; also returns the smallest
/// eigenvalue of the input.
pub(crate) fn project_psd_coords(x: &RVec, n: usize, floor: f64) -> (RVec, f64) {
    let h = coords_to_herm(x, n);
    let (vals, vecs) = eigh(&h);
    if vals[0] >= floor {
        return (x.clone(), vals[0]);
    }
    let p = spectral_map(&vals, &vecs, |l| l.max(floor));
    (herm_to_coords(&p), vals[0])
}

/// Proximal operator of `t·‖χ‖₁` (sum of complex moduli of all entries) in
/// Hermitian real coordinates. Off-diagonal pairs appear twice in `χ`, so
/// their coordinate pair shrinks jointly by `√2·t`.
pub(crate) fn prox_l1_coords(x: &RVec, n: usize, t: f64) -> RVec {
    let mut out = x.clone();
    let pair_t = std::f64::consts::SQRT_2 * t;
    for r in 0..n {
        let k = r + r * n;
        let v = x[k];
        out[k] = v.signum() * (v.abs() - t).max(0.0);
        for b in (r + 1)..n {
            let ku = r + b * n;
            let kl = b + r * n;
            let m = x[ku].hypot(x[kl]);
            let w = if m <= pair_t { 0.0 } else { (m - pair_t) / m };
            out[ku] = x[ku] * w;
            out[kl] = x[kl] * w;
        }
    }
    out
}

/// `‖χ‖₁` from Hermitian real coordinates.
pub(crate) fn l1_coords(x: &RVec, n: usize) -> f64 {
    let mut acc = 0.0;
    for r in 0..n {
        acc += x[r + r * n].abs();
        for b in (r + 1)..n {
            acc += std::f64::consts::SQRT_2 * x[r + b * n].hypot(x[b + r * n]);
        }
    }
    acc
}

pub(crate) fn require_finite(x: &RVec) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("solver iterate"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, frobenius, random_hermitian};
    use crate::process::metrics::{matrix_norm, Norm};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn soft_threshold_examples() {
        let out = soft_threshold(&[c(3.0, 0.0), c(0.0, 4.0)], 1.0);
        assert!((out[0] - c(2.0, 0.0)).norm() < 1e-15);
        assert!((out[1] - c(0.0, 3.0)).norm() < 1e-15);
        let v = [c(1.5, -2.0), c(0.1, 0.2)];
        assert_eq!(soft_threshold(&v, 0.0), v.to_vec());
        assert_eq!(soft_threshold(&[c(0.5, 0.0)], 1.0), vec![c(0.0, 0.0)]);
    }

    #[test]
    fn psd_projection_examples() {
        let m = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(2.0, 0.0), c(-1.0, 0.0)]));
        let p = project_psd(&m).unwrap();
        let expected = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(2.0, 0.0), c(0.0, 0.0)]));
        assert!(frobenius(&(p - expected)) < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_hermitian(6, &mut rng);
        let psd = &g * &g;
        assert!(frobenius(&(project_psd(&psd).unwrap() - &psd)) < 1e-12);
        let once = project_psd(&g).unwrap();
        let twice = project_psd(&once).unwrap();
        assert!(frobenius(&(once - twice)) < 1e-12);
    }

    #[test]
    fn psd_projection_rejects_non_hermitian() {
        let mut m = CMat::identity(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(project_psd(&m).is_err());
    }

    #[test]
    fn l1_prox_matches_complex_soft_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_hermitian(4, &mut rng);
        let x = herm_to_coords(&h);
        let t = 0.3;
        let got = coords_to_herm(&prox_l1_coords(&x, 4, t), 4);
        let expected = soft_threshold(h.as_slice(), t);
        let expected = CMat::from_column_slice(4, 4, &expected);
        assert!(frobenius(&(got - expected)) < 1e-13);
        assert!((l1_coords(&x, 4) - matrix_norm(&h, Norm::L1)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn psd_projection_is_non_expansive(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_hermitian(5, &mut rng);
            let b = random_hermitian(5, &mut rng);
            let pa = project_psd(&a).unwrap();
            let pb = project_psd(&b).unwrap();
            prop_assert!(frobenius(&(&pa - &pb)) <= frobenius(&(&a - &b)) + 1e-12);
            prop_assert!(frobenius(&(project_psd(&pa).unwrap() - &pa)) < 1e-12);
        }
    }
}
