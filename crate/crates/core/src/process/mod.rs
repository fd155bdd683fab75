//! Quantum-channel data model: gates, states, operator bases, process
//! matrices and the scalar metrics defined on them.

pub mod basis;
pub mod chi;
pub mod gates;
pub mod metrics;
pub mod state;

pub use basis::{gate_basis, pauli_basis, BasisTag, OperatorBasis};
pub use chi::{
    apply_channel, change_basis, check_cptp, chi_from_kraus, chi_from_unitary, unvec_chi,
    vec_chi, CptpReport, ProcessMatrix,
};
pub use gates::UnitaryGate;
pub use metrics::{matrix_norm, process_fidelity, purity, unitary_fidelity, vector_norm, Norm};
pub use state::{Observable, ObservableKind, QState};
