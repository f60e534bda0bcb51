//! Simulation and analysis toolkit for a Rydberg-Fermi cavity-QED photonic
//! terminal: Rydberg wavefunctions, Fermi-pseudopotential potential curves,
//! conditional time-bin photon emission from a plaquette-encoded logical
//! qubit, and the entanglement-swapping algebra that links two terminals.
//!
//! Module map:
//!
//! * [`atomic`] species data, quantum defects, phase shifts
//! * [`wavefunctions`] Numerov radial solver, spherical harmonics, gradients
//! * [`pec`] truncated basis, pseudopotential matrix elements, potential curves
//! * [`gate`] level scheme, encodings, evolution, fidelity
//! * [`analysis`] reduced models, analytic flux, adiabaticity, sweeps
//! * [`swap`] rotated Bell basis, photonic CZ, Bell projection
//! * [`scenario`] config files and command drivers used by the `rfterm` binary

pub mod analysis;
pub mod atomic;
pub mod error;
pub mod exec;
pub mod gate;
pub mod half;
pub mod integrate;
pub mod pec;
pub mod scenario;
pub mod swap;
pub mod units;
pub mod wavefunctions;

pub use error::{Error, Result};
pub use half::Half;
