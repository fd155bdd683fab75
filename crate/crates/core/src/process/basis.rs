use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{frobenius, inner, CMat};
use crate::process::gates::{pauli, tensor_all, UnitaryGate};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BasisTag {
    Pauli,
    Gate(String),
}

impl fmt::Display for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisTag::Pauli => write!(f, "pauli"),
            BasisTag::Gate(label) => write!(f, "gate:{label}"),
        }
    }
}

/// An orthonormal operator basis `{Γ_α}` of `d²` matrices, each `d×d`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBasis {
    elements: Vec<CMat>,
    tag: BasisTag,
    dim: usize,
}

impl OperatorBasis {
    /// Validates orthonormality to 1e-10.
    pub fn new(elements: Vec<CMat>, tag: BasisTag) -> Result<Self> {
        let dim = elements.first().map(|e| e.nrows()).unwrap_or(0);
        if dim == 0 || elements.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "basis of {}x{} operators needs {} elements, got {}",
                dim,
                dim,
                dim * dim,
                elements.len()
            )));
        }
        if elements.iter().any(|e| e.nrows() != dim || e.ncols() != dim) {
            return Err(Error::Dimension("basis elements differ in size".into()));
        }
        let basis = Self { elements, tag, dim };
        let defect = basis.orthonormality_defect();
        if defect > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "basis is not orthonormal (defect {defect:.3e})"
            )));
        }
        Ok(basis)
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }

    pub fn element(&self, alpha: usize) -> &CMat {
        &self.elements[alpha]
    }

    pub fn tag(&self) -> &BasisTag {
        &self.tag
    }

    /// Hilbert-space dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of elements, `d²`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `max_{α,β} |Tr(Γ_β†Γ_α) − δ_αβ|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, ga) in self.elements.iter().enumerate() {
            for (b, gb) in self.elements.iter().enumerate().skip(a) {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((inner(gb, ga) - target).norm());
            }
        }
        worst
    }

    /// Expansion coefficients `c_α = Tr(Γ_α†·A)`.
    pub fn coefficients(&self, a: &CMat) -> Vec<crate::linalg::C64> {
        self.elements.iter().map(|g| inner(g, a)).collect()
    }

    /// Resolves `pauli` or `gate:<label>` for a Hilbert-space dimension `d`.
    pub fn from_tag_str(tag: &str, d: usize) -> Result<Arc<Self>> {
        if tag == "pauli" {
            if d < 2 || !d.is_power_of_two() {
                return Err(Error::Dimension(format!("no Pauli basis for d = {d}")));
            }
            return Ok(Arc::new(pauli_basis(d.trailing_zeros() as usize)));
        }
        let label = tag
            .strip_prefix("gate:")
            .ok_or_else(|| Error::UnknownLabel(tag.to_string()))?;
        let gate = UnitaryGate::from_label(label)?;
        if gate.dim() != d {
            return Err(Error::Dimension(format!(
                "gate {label} acts on d = {}, expected {d}",
                gate.dim()
            )));
        }
        Ok(Arc::new(gate_basis(&gate)))
    }
}

/// All `4ⁿ` tensor products of `{I, X, Y, Z}` scaled by `1/√d`, ordered
/// lexicographically with the first qubit most significant.
pub fn pauli_basis(n: usize) -> OperatorBasis {
    assert!(n >= 1, "pauli_basis needs at least one qubit");
    let d = 1usize << n;
    let scale = 1.0 / (d as f64).sqrt();
    let letters = ['I', 'X', 'Y', 'Z'];
    let elements = (0..d * d)
        .map(|mut idx| {
            let mut factors = vec![CMat::zeros(2, 2); n];
            for q in (0..n).rev() {
                factors[q] = pauli(letters[idx % 4]).unwrap();
                idx /= 4;
            }
            tensor_all(&factors).scale(scale)
        })
        .collect();
    OperatorBasis { elements, tag: BasisTag::Pauli, dim: d }
}

/// Label of the `alpha`-th Pauli basis element, e.g. `"IZ"`.
pub fn pauli_label(n: usize, mut alpha: usize) -> String {
    let letters = ['I', 'X', 'Y', 'Z'];
    let mut out = vec!['I'; n];
    for q in (0..n).rev() {
        out[q] = letters[alpha % 4];
        alpha /= 4;
    }
    out.into_iter().collect()
}

/// Basis whose first element is `U/√d`; the rest is a Gram–Schmidt completion
/// over the Pauli basis in its lexicographic order. The ideal channel of `U`
/// is 1-sparse in this basis.
pub fn gate_basis(gate: &UnitaryGate) -> OperatorBasis {
    let d = gate.dim();
    let n = gate.qubits();
    let target = d * d;
    let mut elements: Vec<CMat> = Vec::with_capacity(target);
    elements.push(gate.matrix().scale(1.0 / (d as f64).sqrt()));
    for candidate in pauli_basis(n).elements {
        if elements.len() == target {
            break;
        }
        let mut r = candidate;
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for e in &elements {
                let proj = inner(e, &r);
                r -= e * proj;
            }
        }
        let norm = frobenius(&r);
        if norm < 1e-10 {
            continue;
        }
        elements.push(r.unscale(norm));
    }
    debug_assert_eq!(elements.len(), target);
    OperatorBasis { elements, tag: BasisTag::Gate(gate.label().to_string()), dim: d }
}
