//! Classical simulation of a frequency-bin photonic variational eigensolver.
//!
//! The crate is split along the pipeline:
//!
//! - [`qfp`]: electro-optic modulator / pulse shaper mode transforms, gate
//!   metrics and simulated density-matrix readout.
//! - [`vqe`]: single-excitation UCC ansatz, measured-ρ gradients and the
//!   variational loop.
//! - [`schwinger`]: Gauss-law bases, Hamiltonians and symmetry sectors for the
//!   staggered lattice Schwinger model with static charges.
//! - [`potential`]: heavy-meson masses, two- and three-body potentials,
//!   exponential fits, contact-EFT matching and charge radii.
//! - [`nuclear`]: matrix ingestion, separable NN phase shifts and
//!   model-space extrapolation.
//! - [`pipeline`]: whole-study energy tables and channel fits.
//! - [`io`]: matrix, energy-table and output formats.

pub mod bessel;
pub mod error;
pub mod io;
pub mod linalg;
pub mod lsq;
pub mod nuclear;
pub mod pipeline;
pub mod potential;
pub mod qfp;
pub mod schwinger;
pub mod stats;
pub mod vqe;

pub use error::{Error, Result};
pub use linalg::{exact_ground, HermitianOperator};
