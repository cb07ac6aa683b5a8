//! Dissipatively stabilized two-qubit entanglement.
//!
//! Builds Lindblad models for single-cavity, cascaded and bidirectional
//! architectures, solves for steady states, composes SLH networks, optimizes
//! steady-state concurrence and runs noise and calibration studies.

pub mod error;
pub mod lindblad;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod noise;
pub mod operators;
pub mod optimize;
pub mod slh;

pub use error::{Error, Result};
pub use faer::{c64, Mat};
