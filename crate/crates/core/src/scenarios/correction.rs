//! Search for single-qubit rotations before and after a two-qubit channel
//! that bring it closest to an ideal gate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::derive_seed;
use crate::linalg::{inner, CMat};
use crate::process::gates::{tensor_all, zyz};
use crate::process::metrics::unitary_overlap;
use crate::process::{unitary_fidelity, ProcessMatrix, UnitaryGate};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorrectionOptions {
    pub restarts: usize,
    pub max_evals: usize,
    pub seed: u64,
    /// Simplex size at which a restart stops.
    pub tol: f64,
}

impl Default for CorrectionOptions {
    fn default() -> Self {
        Self { restarts: 20, max_evals: 6000, seed: 0, tol: 1e-10 }
    }
}

/// Corrections `A⊗B` (applied after the channel) and `C⊗D` (applied before),
/// each single-qubit factor given by ZYZ angles in the order A, B, C, D.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalCorrection {
    pub angles: [f64; 12],
    pub before: CMat,
    pub after: CMat,
    pub fidelity_before: f64,
    pub fidelity: f64,
}

impl LocalCorrection {
    fn from_angles(angles: [f64; 12], fidelity_before: f64, fidelity: f64) -> Self {
        let (after, before) = correction_unitaries(&angles);
        Self { angles, before, after, fidelity_before, fidelity }
    }

    /// `χ` of `(A⊗B) ∘ S ∘ (C⊗D)`, computed as `T χ T†` with
    /// `T_ab = Tr(Γ_a† V Γ_b W)`.
    pub fn apply(&self, chi: &ProcessMatrix) -> Result<ProcessMatrix> {
        if chi.dim() != self.after.nrows() {
            return Err(Error::Dimension("correction and channel dimensions differ".into()));
        }
        let basis = chi.basis();
        let n = basis.len();
        let moved: Vec<CMat> = basis.elements().iter().map(|g| &self.after * g * &self.before).collect();
        let t = CMat::from_fn(n, n, |a, b| inner(basis.element(a), &moved[b]));
        ProcessMatrix::new(&t * chi.chi() * t.adjoint(), basis.clone())
    }
}

fn correction_unitaries(angles: &[f64; 12]) -> (CMat, CMat) {
    let f: Vec<CMat> = angles.chunks(3).map(zyz).collect();
    (tensor_all(&f[0..2]), tensor_all(&f[2..4]))
}

/// Maximizes `F(U, (A⊗B)∘S∘(C⊗D))` over single-qubit unitaries with seeded
/// Nelder–Mead restarts; the first restart starts from no correction. Returns
/// identity corrections when nothing beats the uncorrected fidelity.
pub fn local_correction_search(chi: &ProcessMatrix, ideal: &UnitaryGate, opts: &CorrectionOptions) -> Result<LocalCorrection> {
    if chi.dim() != 4 || ideal.dim() != 4 {
        return Err(Error::Dimension("local corrections are defined for two qubits".into()));
    }
    if opts.restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is required".into()));
    }
    let f0 = unitary_fidelity(ideal, chi)?;
    let u = ideal.matrix();
    // F(U, V∘S∘W) = F(V†·U·W†, S)
    let cost = |x: &[f64]| -> f64 {
        let a: [f64; 12] = x.try_into().expect("12 angles");
        let (v, w) = correction_unitaries(&a);
        -unitary_overlap(&(v.adjoint() * u * w.adjoint()), chi)
    };
    let mut best = ([0.0; 12], f0);
    for r in 0..opts.restarts {
        let start: [f64; 12] = if r == 0 {
            [0.0; 12]
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, r as u64));
            std::array::from_fn(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
        };
        let (x, fx) = nelder_mead(&cost, &start, 0.5, opts.max_evals, opts.tol);
        if -fx > best.1 {
            best = (x.try_into().expect("12 angles"), -fx);
        }
    }
    Ok(LocalCorrection::from_angles(best.0, f0, best.1))
}

/// Minimizes `f` from `x0` with an initial simplex of edge `step`.
fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: f64, max_evals: usize, tol: f64) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let mut evals = n + 1;
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect() };
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread.abs() <= tol && size <= tol.sqrt() {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let reflected = lerp(&centroid, &worst.0, -1.0);
        let fr = f(&reflected);
        evals += 1;
        if fr < simplex[0].1 {
            let expanded = lerp(&centroid, &worst.0, -2.0);
            let fe = f(&expanded);
            evals += 1;
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let (target, ft) = if fr < worst.1 { (&reflected, fr) } else { (&worst.0, worst.1) };
            let contracted = lerp(&centroid, target, 0.5);
            let fc = f(&contracted);
            evals += 1;
            if fc < ft {
                simplex[n] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    p.0 = lerp(&best, &p.0, 0.5);
                    p.1 = f(&p.0);
                }
                evals += n;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    (x, fx)
}
