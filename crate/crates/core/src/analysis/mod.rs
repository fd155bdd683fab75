//! Compressive-sensing diagnostics: sparsity spectra, best s-sparse
//! approximations, recovery bounds, isometry estimates and sparsity
//! certification.

pub mod bounds;
pub mod certify;
pub mod rip;
pub mod spectrum;

pub use bounds::{
    concentration_bounds, concentration_bounds_for, recovery_bound, recovery_constants,
    rip_failure_bound, BoundReport, ConcentrationBounds, DELTA_MAX,
};
pub use certify::{sparsity_certification, Certification};
pub use rip::{empirical_rip, empirical_rip_profile, RipEstimate};
pub use spectrum::{
    approx_error_l1, s_sparse_approx, sorted_spectrum, sorted_spectrum_with, SparsitySpectrum,
    ThresholdCount, DEFAULT_THRESHOLDS,
};
