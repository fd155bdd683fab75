//! Compressive quantum process tomography.

pub mod analysis;
pub mod error;
pub mod exec;
pub mod json;
pub mod linalg;
pub mod measurement;
pub mod process;
pub mod scenarios;
pub mod solver;

pub use error::{Error, Result};
