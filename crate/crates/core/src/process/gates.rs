use std::f64::consts::PI;

use nalgebra::DVector;


use crate::error::{Error, Result};
use crate::linalg::{c, frobenius, kron, CMat, C64, I, ONE, ZERO};

const UNITARITY_TOL: f64 = 1e-12;

/// A `d×d` unitary with a label such as `"CZ"`, `"QFT4"` or `"I4"`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryGate {
    matrix: CMat,
    label: String,
}

impl UnitaryGate {
    pub fn new(label: impl Into<String>, matrix: CMat) -> Result<Self> {
        let d = matrix.nrows();
        if !matrix.is_square() || d < 2 || !d.is_power_of_two() {
            return Err(Error::Dimension(format!(
                "gate must be 2^n x 2^n, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let defect = frobenius(&(matrix.adjoint() * &matrix - CMat::identity(d, d)));
        if defect > UNITARITY_TOL * (d as f64) {
            return Err(Error::InvalidArgument(format!(
                "matrix is not unitary (defect {defect:.3e})"
            )));
        }
        Ok(Self { matrix, label: label.into() })
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn cz() -> Self {
        let mut m = CMat::identity(4, 4);
        m[(3, 3)] = -ONE;
        Self { matrix: m, label: "CZ".into() }
    }

    pub fn cnot() -> Self {
        let mut m = CMat::zeros(4, 4);
        m[(0, 0)] = ONE;
        m[(1, 1)] = ONE;
        m[(2, 3)] = ONE;
        m[(3, 2)] = ONE;
        Self { matrix: m, label: "CNOT".into() }
    }

    pub fn identity(d: usize) -> Self {
        Self { matrix: CMat::identity(d, d), label: format!("I{d}") }
    }

    /// Quantum Fourier transform on `n` qubits, `U_jk = ω^{jk}/√d`.
    pub fn qft(n: usize) -> Self {
        let d = 1usize << n;
        let norm = 1.0 / (d as f64).sqrt();
        let m = CMat::from_fn(d, d, |j, k| {
            let phase = 2.0 * PI * ((j * k) % d) as f64 / d as f64;
            C64::from_polar(norm, phase)
        });
        // exact values for the quarter turns
        let m = m.map(|z| c(snap(z.re), snap(z.im)));
        Self { matrix: m, label: format!("QFT{d}") }
    }

    /// Resolves a library label: `CZ`, `CNOT`, `QFT` (two qubits), `QFT<d>`, `I<d>`.
    pub fn from_label(label: &str) -> Result<Self> {
        let unknown = || Error::UnknownLabel(label.to_string());
        match label {
            "CZ" => Ok(Self::cz()),
            "CNOT" => Ok(Self::cnot()),
            "QFT" => Ok(Self::qft(2)),
            _ => {
                let (kind, rest) = if let Some(r) = label.strip_prefix("QFT") {
                    ("QFT", r)
                } else if let Some(r) = label.strip_prefix('I') {
                    ("I", r)
                } else {
                    return Err(unknown());
                };
                let d: usize = rest.parse().map_err(|_| unknown())?;
                if d < 2 || !d.is_power_of_two() || d > 1 << 6 {
                    return Err(unknown());
                }
                Ok(if kind == "QFT" {
                    Self::qft(d.trailing_zeros() as usize)
                } else {
                    Self::identity(d)
                })
            }
        }
    }

    pub fn compose(&self, after: &UnitaryGate) -> Result<UnitaryGate> {
        UnitaryGate::new(
            format!("{}*{}", after.label, self.label),
            after.matrix() * self.matrix(),
        )
    }
}

fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < 1e-15 {
        r
    } else {
        for v in [0.5, -0.5] {
            if (x - v).abs() < 1e-15 {
                return v;
            }
        }
        x
    }
}

pub fn pauli_i() -> CMat {
    CMat::identity(2, 2)
}

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Single-qubit Pauli by letter.
pub fn pauli(letter: char) -> Option<CMat> {
    match letter {
        'I' => Some(pauli_i()),
        'X' => Some(pauli_x()),
        'Y' => Some(pauli_y()),
        'Z' => Some(pauli_z()),
        _ => None,
    }
}

pub fn rz(theta: f64) -> CMat {
    CMat::from_diagonal(&DVector::from_vec(vec![
        C64::from_polar(1.0, -theta / 2.0),
        C64::from_polar(1.0, theta / 2.0),
    ]))
}

pub fn ry(theta: f64) -> CMat {
    let (s, co) = (theta / 2.0).sin_cos();
    CMat::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
}

/// `Rz(a)·Ry(b)·Rz(c)`: every single-qubit unitary up to global phase.
pub fn zyz(angles: &[f64]) -> CMat {
    rz(angles[0]) * ry(angles[1]) * rz(angles[2])
}

pub fn tensor_all(factors: &[CMat]) -> CMat {
    factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, f| kron(&acc, f))
}
