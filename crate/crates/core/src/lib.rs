//! Spectra, level dynamics, phase-space volumes and canonical thermodynamics
//! for the one-dimensional cusp Hamiltonian and the two-dimensional
//! collective Hamiltonian with a `cos 3φ` term.

pub mod basis;
pub mod classical;
pub mod density;
pub mod error;
pub mod levelflow;
pub mod linalg;
pub mod potentials;
pub mod quad;
pub mod spectra;
pub mod thermo;

pub use error::{Error, Result};
