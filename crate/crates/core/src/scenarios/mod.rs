//! Simulated channels and end-to-end experiments.

pub mod channels;
pub mod correction;
pub mod experiment;

pub use channels::{
    calibrate_near_identity, calibrate_qft_time, cz_decohered, cz_decohered_with, depolarizing_lambda,
    dilated_kraus, near_identity_channel, qft_env_channel, DecoherenceModel, EnvironmentCoupling,
};
pub use correction::{local_correction_search, CorrectionOptions, LocalCorrection};
pub use experiment::{
    convergence_experiment, ExperimentReport, ExperimentRow, FullFit, ScenarioConfig, ScenarioKind,
    DEFAULT_EPSILON_FACTOR,
};
