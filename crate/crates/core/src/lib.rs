//! Continuous data assimilation (interpolated nudging) for the
//! Ladyzhenskaya/Smagorinsky large eddy simulation model on periodic boxes.
//!
//! A reference run (Navier–Stokes or LES) is observed through an interpolant
//! `I_h`, and the observations relax a second run through the feedback term
//! `μ (I_h u − I_h v)`. The harness measures how fast and how far the two
//! synchronize.

pub mod config;
pub mod error;
pub mod harness;
pub mod init;
pub mod interpolant;
pub mod les;
pub mod oracle;
pub mod output;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use harness::{ErrorSeries, TwinExperiment};
pub use solver::{SimState, SolverConfig, Stepper};
pub use spectral::{Grid, SpectralField, VectorField};
