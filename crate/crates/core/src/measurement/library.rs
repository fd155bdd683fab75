//! Product input states and local observables addressed by polarization-style
//! labels: `H V D A R L` for single-qubit states, `I` for identity padding in
//! projector labels, and `I X Y Z` for Pauli expectation observables.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{c, projector, CMat, C64};
use crate::process::gates::{pauli, tensor_all};
use crate::process::{Observable, ObservableKind, QState};

pub const STATE_LETTERS: [char; 6] = ['H', 'V', 'D', 'A', 'R', 'L'];
/// Inputs prepared in the two-qubit experiment.
pub const INPUT_LETTERS: [char; 4] = ['H', 'V', 'D', 'R'];

pub fn ket(letter: char) -> Option<DVector<C64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let amps = match letter {
        'H' => [c(1.0, 0.0), c(0.0, 0.0)],
        'V' => [c(0.0, 0.0), c(1.0, 0.0)],
        'D' => [c(s, 0.0), c(s, 0.0)],
        'A' => [c(s, 0.0), c(-s, 0.0)],
        'R' => [c(s, 0.0), c(0.0, s)],
        'L' => [c(s, 0.0), c(0.0, -s)],
        _ => return None,
    };
    Some(DVector::from_row_slice(&amps))
}

/// Local measurement basis a projector letter belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LocalBasis {
    Z,
    X,
    Y,
}

impl LocalBasis {
    pub fn of(letter: char) -> Option<Self> {
        match letter {
            'H' | 'V' => Some(Self::Z),
            'D' | 'A' => Some(Self::X),
            'R' | 'L' => Some(Self::Y),
            _ => None,
        }
    }

    pub fn outcomes(self) -> [char; 2] {
        match self {
            Self::Z => ['H', 'V'],
            Self::X => ['D', 'A'],
            Self::Y => ['R', 'L'],
        }
    }

    pub const ALL: [LocalBasis; 3] = [LocalBasis::Z, LocalBasis::X, LocalBasis::Y];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObsLabelKind {
    Projector,
    Pauli,
}

/// Classifies an observable label: any of `X Y Z` makes it a Pauli product,
/// otherwise it is a projector over `H V D A R L I`.
pub fn classify_observable(label: &str) -> Result<ObsLabelKind> {
    let unknown = || Error::UnknownLabel(label.to_string());
    if label.is_empty() {
        return Err(unknown());
    }
    let pauli = label.chars().any(|ch| matches!(ch, 'X' | 'Y' | 'Z'));
    let proj = label.chars().any(|ch| LocalBasis::of(ch).is_some());
    match (pauli, proj) {
        (true, true) => Err(unknown()),
        (true, false) => {
            if label.chars().all(|ch| matches!(ch, 'I' | 'X' | 'Y' | 'Z')) {
                Ok(ObsLabelKind::Pauli)
            } else {
                Err(unknown())
            }
        }
        _ => {
            if label.chars().all(|ch| ch == 'I' || LocalBasis::of(ch).is_some()) {
                Ok(ObsLabelKind::Projector)
            } else {
                Err(unknown())
            }
        }
    }
}

/// Label resolver for `n`-qubit product states and local observables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateLibrary {
    n: usize,
}

pub fn state_library(n: usize) -> Result<StateLibrary> {
    if !(1..=4).contains(&n) {
        return Err(Error::InvalidArgument(format!("library supports 1..=4 qubits, got {n}")));
    }
    Ok(StateLibrary { n })
}

impl StateLibrary {
    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    fn check_len(&self, label: &str) -> Result<()> {
        if label.chars().count() != self.n {
            return Err(Error::UnknownLabel(format!("{label} (expected {} letters)", self.n)));
        }
        Ok(())
    }

    pub fn state(&self, label: &str) -> Result<QState> {
        self.check_len(label)?;
        let kets = label
            .chars()
            .map(|ch| ket(ch).ok_or_else(|| Error::UnknownLabel(label.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let mut psi = kets[0].clone();
        for k in &kets[1..] {
            psi = psi.kronecker(k);
        }
        Ok(QState::pure(&psi))
    }

    pub fn observable(&self, label: &str) -> Result<Observable> {
        self.check_len(label)?;
        match classify_observable(label)? {
            ObsLabelKind::Pauli => {
                let factors: Vec<CMat> = label.chars().map(|ch| pauli(ch).unwrap()).collect();
                Observable::new(label, tensor_all(&factors), ObservableKind::Expectation)
            }
            ObsLabelKind::Projector => {
                let factors: Vec<CMat> = label
                    .chars()
                    .map(|ch| match ket(ch) {
                        Some(k) => projector(&k),
                        None => CMat::identity(2, 2),
                    })
                    .collect();
                Observable::new(label, tensor_all(&factors), ObservableKind::Projector)
            }
        }
    }

    /// All `n`-letter words over `letters`, lexicographic in the given order.
    pub fn words(&self, letters: &[char]) -> Vec<String> {
        let mut out = vec![String::new()];
        for _ in 0..self.n {
            out = out
                .iter()
                .flat_map(|w| letters.iter().map(move |&ch| format!("{w}{ch}")))
                .collect();
        }
        out
    }

    /// Product states over all six polarization letters.
    pub fn state_labels(&self) -> Vec<String> {
        self.words(&STATE_LETTERS)
    }

    /// Single-body Pauli observables, e.g. `IX, IY, IZ, XI, YI, ZI` for two qubits.
    pub fn single_body_paulis(&self) -> Vec<String> {
        let mut out = Vec::new();
        for q in (0..self.n).rev() {
            for p in ['X', 'Y', 'Z'] {
                let mut w = vec!['I'; self.n];
                w[q] = p;
                out.push(w.into_iter().collect());
            }
        }
        out
    }
}
