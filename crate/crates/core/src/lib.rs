//! Simulation and analysis of a single ion in a funnel-shaped trap.
//!
//! The funnel couples the radial amplitude to the axial equilibrium, which in turn
//! shifts the radial resonance: the driven radial mode becomes a Duffing oscillator.
//! The crate provides
//!
//! - [`trap`]: parameters and closed-form derived quantities,
//! - [`steady`]: steady states, stability, bistable windows and branch tracking,
//! - [`dynamics`]: time-domain integration of the full and the envelope models,
//! - [`measurement`]: camera sampling, localisation noise and amplitude spectra,
//! - [`experiments`]: frequency sweeps and the three-stage signal amplification,
//! - [`config`]: the key-value parameter file.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod io;
pub mod measurement;
pub mod steady;
pub mod trap;
pub mod units;

pub use error::{Error, Result};
pub use exec::Execution;
pub use trap::{DerivedParams, DriveConfig, TrapParams};
