//! Measurement model: configurations, the sensing matrix `Φ`, simulated
//! acquisition and count normalization.

pub mod config;
pub mod data;
pub mod library;
pub mod sensing;

pub use config::{
    full_config_set, random_pauli_configs, select_configs, table1_set, ConfigSet, Configuration,
    Selection, TABLE1_IDS,
};
pub use data::{exact_dataset, normalize_counts, simulate_counts, Dataset, Record, RecordKind};
pub use library::{state_library, StateLibrary};
pub use sensing::{build_phi, predict_expectations, SensingMatrix};
