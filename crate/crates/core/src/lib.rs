//! Imaginary-time quantum dynamics for molecular structure optimization.
//!
//! Electrons and nuclei are carried together in one grid wavefunction,
//! relaxed to the ground state with a split-operator Fourier propagator, and
//! the nuclear geometry is read off from the electron-integrated density,
//! either exactly or through simulated measurements.

pub mod analysis;
pub mod config;
pub mod error;
pub mod fft;
pub mod grid;
pub mod observables;
pub mod operators;
pub mod oracle;
pub mod pipeline;
pub mod propagator;
pub mod sampler;
pub mod state;
pub mod validation;

pub use error::{Error, ErrorCategory, Result};
pub use grid::{AxisSpec, GridSpec};
pub use operators::{HamiltonianModel, ParticleMasses};
pub use propagator::{PropagationReport, PropagatorParams};
pub use state::WaveFunction;

/// Version string embedded in every output artifact.
pub const VERSION: &str = concat!("qdopt ", env!("CARGO_PKG_VERSION"));
