//! Rate-energy tradeoff analysis for wireless information and power
//! transfer.
//!
//! The library models RF energy harvesters (linear, diode nonlinear, and
//! saturation variants), builds frequency-selective MIMO channels, evaluates
//! waveform moments analytically and by Monte Carlo, solves the associated
//! power-allocation and beamforming problems, and traces rate-energy (R-E)
//! boundary regions for single-user and small multi-user systems. Every
//! solver ships with a brute-force oracle at desk scale.

pub mod allocate;
pub mod channel;
pub mod error;
pub mod harvester;
pub mod multiuser;
pub mod region;
pub mod signal;

pub use error::{Error, Result};
