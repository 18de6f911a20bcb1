//! Periodic-box field representation, transforms and spectral calculus.

mod checkpoint;
mod fft;
mod field;
mod grid;
mod ops;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use field::{SpectralField, VectorField, SOLENOIDAL_TOL};
pub use grid::{Grid, LAMBDA1};
pub use ops::{
    dealias_23, dealias_vector, derivative, divergence, energy_spectrum, frobenius, gradient,
    gradient_tensor, h1_seminorm, l2_norm, leray_project, lp_gradient_norm, to_physical,
    to_spectral,
};
pub(crate) use ops::dealias_in_place;
