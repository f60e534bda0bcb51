//! Rydberg wavefunctions: Numerov radial solutions, spherical harmonics and
//! the spherical-coordinate gradient of `ψ = R_nl(r) Y_l^m(θ, φ)`.

mod angular;
mod radial;

pub use angular::{orbital_gradient, orbital_value, spherical_harmonic, spherical_harmonic_dtheta, POLE_EXCLUSION};
pub use radial::{radial_solve, GridSpec, InnerCutoff, RadialWave};

use serde::{Deserialize, Serialize};

use crate::atomic::check_quantum_numbers;
use crate::{Error, Half, Result};

/// Fine-structure Rydberg state `|n l j m_j⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RydbergState {
    pub n: u32,
    pub l: u32,
    pub j: Half,
    pub m: Half,
}

impl RydbergState {
    pub fn new(n: u32, l: u32, j: Half, m: Half) -> Result<Self> {
        check_quantum_numbers(n, l, j)?;
        if m.0.abs() > j.0 || !m.is_half_odd() {
            return Err(Error::Domain(format!("m={m} is not a valid projection of j={j}")));
        }
        Ok(RydbergState { n, l, j, m })
    }

    /// Spectroscopic label such as `45D5/2 m=5/2`.
    pub fn label(&self) -> String {
        format!("{}{}{} m={}", self.n, orbital_letter(self.l), self.j, self.m)
    }
}

pub fn orbital_letter(l: u32) -> String {
    const LETTERS: [&str; 8] = ["S", "P", "D", "F", "G", "H", "I", "K"];
    LETTERS.get(l as usize).map_or_else(|| format!("[l={l}]"), |s| s.to_string())
}
