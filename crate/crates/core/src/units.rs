//! Unit conventions.
//!
//! Atomic-structure code (atomic data, wavefunctions, potential curves) works
//! in Hartree atomic units. Everything user facing quotes frequencies the way
//! the cold-atom literature does, as "2π×MHz": the stored number is the
//! ordinary frequency ν in MHz and the angular frequency is 2πν. Gate dynamics
//! runs in rad/µs, so ω[rad/µs] = 2π · ν[MHz].

use std::f64::consts::PI;

/// Hartree energy divided by Planck's constant, in MHz (CODATA 2018).
pub const HARTREE_MHZ: f64 = 6.579_683_920_502e9;

/// Bohr radius in nanometres (CODATA 2018).
pub const BOHR_NM: f64 = 0.052_917_721_090_3;

/// Electron mass in unified atomic mass units.
pub const ELECTRON_MASS_AMU: f64 = 5.485_799_090_65e-4;

/// Atomic mass unit in kg.
pub const AMU_KG: f64 = 1.660_539_066_60e-27;

/// Planck constant in J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;

pub fn hartree_to_mhz(e: f64) -> f64 {
    e * HARTREE_MHZ
}

pub fn mhz_to_hartree(nu: f64) -> f64 {
    nu / HARTREE_MHZ
}

pub fn nm_to_bohr(x: f64) -> f64 {
    x / BOHR_NM
}

pub fn bohr_to_nm(x: f64) -> f64 {
    x * BOHR_NM
}

/// 2π×MHz value to angular frequency in rad/µs.
pub fn mhz_to_rad_us(nu: f64) -> f64 {
    2.0 * PI * nu
}

pub fn rad_us_to_mhz(w: f64) -> f64 {
    w / (2.0 * PI)
}
