//! Dense complex linear-algebra helpers shared by every module.
//!
//! Hermitian matrices that enter the optimizer are carried in a real
//! coordinate system of the same dimension as `vec(χ)`: for a `D×D`
//! Hermitian matrix the coordinate at column-major position `a + b·D` is
//!
//! * `χ_aa` when `a == b`,
//! * `√2·Re χ_ab` when `a < b`,
//! * `√2·Im χ_ba` when `a > b` (the imaginary part of the upper entry).
//!
//! The map is an isometry between the Frobenius norm and the Euclidean norm.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// `Tr(A·B)` without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `Tr(A†·B)`, the Hilbert–Schmidt inner product.
pub fn inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn is_finite(a: &CMat) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Frobenius norm of the anti-Hermitian part, `‖A − A†‖_F / 2`.
pub fn asymmetry(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] - a[(j, i)].conj()).norm_sqr();
        }
    }
    acc.sqrt() / 2.0
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// Symmetrizes `a` when its anti-Hermitian part is below `tol` (relative to
/// `max(1, ‖a‖_F)`), and rejects it otherwise.
pub fn checked_hermitian(a: &CMat, tol: f64) -> Result<CMat> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "expected square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if !is_finite(a) {
        return Err(Error::NonFinite("matrix"));
    }
    let asym = asymmetry(a);
    if asym > tol * frobenius(a).max(1.0) {
        return Err(Error::NotHermitian(asym));
    }
    Ok(hermitian_part(a))
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted ascending.
/// The input is assumed Hermitian; only its Hermitian part is used.
pub fn eigh(a: &CMat) -> (RVec, CMat) {
    let h = hermitian_part(a);
    let n = h.nrows();
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = RVec::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn min_eigenvalue(a: &CMat) -> f64 {
    let (vals, _) = eigh(a);
    vals.iter().copied().fold(f64::INFINITY, f64::min)
}

/// `V·diag(f(λ))·V†`.
pub fn spectral_map(vals: &RVec, vecs: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let n = vecs.nrows();
    let mut scaled = vecs.clone();
    for k in 0..vals.len() {
        let w = f(vals[k]);
        for i in 0..n {
            scaled[(i, k)] *= w;
        }
    }
    &scaled * vecs.adjoint()
}

/// Square root of a PSD matrix. Eigenvalues at or below `floor · λ_max` are
/// treated as exact zeros.
pub fn sqrt_psd(a: &CMat, floor: f64) -> CMat {
    let (vals, vecs) = eigh(a);
    let cut = floor * vals.iter().copied().fold(0.0, f64::max);
    spectral_map(&vals, &vecs, |l| if l > cut { l.sqrt() } else { 0.0 })
}

/// `exp(-i·H·t)` for Hermitian `H`.
pub fn unitary_evolution(h: &CMat, t: f64) -> CMat {
    let (vals, vecs) = eigh(h);
    let n = vecs.nrows();
    let mut scaled = vecs.clone();
    for k in 0..n {
        let phase = C64::from_polar(1.0, -vals[k] * t);
        for i in 0..n {
            scaled[(i, k)] *= phase;
        }
    }
    &scaled * vecs.adjoint()
}

/// Hermitian generator `H` with `exp(-i·H) = U` for a unitary `U`, eigenphases
/// taken in `(-π, π]`.
pub fn unitary_log(u: &CMat) -> CMat {
    // A generic real combination of the Hermitian and anti-Hermitian parts
    // shares U's eigenvectors and separates its distinct eigenvalues.
    let herm = (u + u.adjoint()).scale(0.5);
    let anti = (u - u.adjoint()) * c(0.0, -0.5);
    let mix = herm.scale(0.618_033_988_749_894_9) + anti.scale(0.786_151_377_757_423_3);
    let (_, vecs) = eigh(&mix);
    let n = u.nrows();
    let mut h = CMat::zeros(n, n);
    for k in 0..n {
        let v = vecs.column(k).into_owned();
        let lambda = (v.adjoint() * u * &v)[(0, 0)];
        let theta = lambda.arg();
        h += (&v * v.adjoint()).scale(-theta);
    }
    hermitian_part(&h)
}

pub fn projector(ket: &DVector<C64>) -> CMat {
    ket * ket.adjoint()
}

/// Hermitian matrix → real coordinates (see module docs).
pub fn herm_to_coords(a: &CMat) -> RVec {
    let n = a.nrows();
    let s2 = std::f64::consts::SQRT_2;
    let mut x = RVec::zeros(n * n);
    for b in 0..n {
        for r in 0..n {
            let k = r + b * n;
            x[k] = match r.cmp(&b) {
                std::cmp::Ordering::Equal => a[(r, r)].re,
                std::cmp::Ordering::Less => s2 * 0.5 * (a[(r, b)].re + a[(b, r)].re),
                std::cmp::Ordering::Greater => s2 * 0.5 * (a[(b, r)].im - a[(r, b)].im),
            };
        }
    }
    x
}

/// Real coordinates → Hermitian matrix of size `n×n`.
pub fn coords_to_herm(x: &RVec, n: usize) -> CMat {
    debug_assert_eq!(x.len(), n * n);
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    let mut a = CMat::zeros(n, n);
    for r in 0..n {
        a[(r, r)] = c(x[r + r * n], 0.0);
        for b in (r + 1)..n {
            let z = c(x[r + b * n] * inv, x[b + r * n] * inv);
            a[(r, b)] = z;
            a[(b, r)] = z.conj();
        }
    }
    a
}

/// Random Hermitian matrix with i.i.d. standard-normal real and imaginary parts
/// before symmetrization.
pub fn random_hermitian<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = random_ginibre(n, n, rng);
    hermitian_part(&g)
}

pub fn random_ginibre<R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    use rand_distr::{Distribution, StandardNormal};
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im)
    })
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn random_unitary<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = random_ginibre(n, n, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, k)] *= phase;
        }
    }
    q
}

pub fn spectral_norm(a: &CMat) -> f64 {
    a.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coords_are_an_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(5, &mut rng);
        let x = herm_to_coords(&h);
        assert!((x.norm() - frobenius(&h)).abs() < 1e-12);
        let back = coords_to_herm(&x, 5);
        assert!(frobenius(&(back - &h)) < 1e-12);
    }

    #[test]
    fn unitary_log_inverts_evolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = random_unitary(4, &mut rng);
        let h = unitary_log(&u);
        let back = unitary_evolution(&h, 1.0);
        assert!(frobenius(&(back - &u)) < 1e-10);
    }

    #[test]
    fn unitary_log_handles_degenerate_spectrum() {
        // eigenvalues {1, 1, -1, -1}
        let z = CMat::from_diagonal(&DVector::from_vec(vec![ONE, -ONE]));
        let u = kron(&z, &CMat::identity(2, 2));
        let back = unitary_evolution(&unitary_log(&u), 1.0);
        assert!(frobenius(&(back - &u)) < 1e-10);
    }

    #[test]
    fn hermitian_check_rejects_skew() {
        let mut a = CMat::identity(2, 2);
        a[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(checked_hermitian(&a, 1e-10), Err(Error::NotHermitian(_))));
    }
}
