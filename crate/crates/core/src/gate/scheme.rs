//! Laser/cavity parameters, pulse timing and the branch Hamiltonian.
//!
//! Parameters are stored as 2π×MHz (ordinary frequency in MHz) and times in
//! µs; [`build_hamiltonian`] returns rad/µs.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::encoding::{Encoding, PlaquetteConfig};
use crate::units::mhz_to_rad_us;
use crate::{Error, Result};

/// Atomic levels of the central atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    S,
    P,
    E,
    R,
}

/// Index of `|level, n⟩` in the 8-dimensional atom ⊗ cavity space (n ≤ 1).
pub const fn idx(level: Level, n: usize) -> usize {
    let l = match level {
        Level::S => 0,
        Level::P => 1,
        Level::E => 2,
        Level::R => 3,
    };
    2 * l + n
}

pub const DIM: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelScheme {
    /// Peak s–p Rabi frequency.
    pub omega_s: f64,
    /// p–r Rabi frequency per color. One color for the four-qubit code, two
    /// (resonant at `S_p = 1` and `S_p = 3`) for the six-qubit code.
    pub omega_r: Vec<f64>,
    /// Vacuum Rabi frequency of the p–e cavity transition.
    pub g: f64,
    /// One-photon detuning of p.
    pub delta: f64,
    /// Per-atom shift magnitude `|V_RF|` of the Rydberg level.
    pub v_rf: f64,
    /// Cavity leakage as it enters `H − iΓ_c n̂`: the field decay rate. The
    /// photon number decays at `2Γ_c`.
    pub gamma_c: f64,
    #[serde(default)]
    pub gamma_p: f64,
    #[serde(default)]
    pub gamma_r: f64,
    /// Two-color schemes: offset each color by the light shift the other
    /// color puts on `r`, so the resonant color meets the dark-state condition.
    #[serde(default = "enabled")]
    pub light_shift_compensation: bool,
}

fn enabled() -> bool {
    true
}

impl LevelScheme {
    /// Operating point of the four-qubit implementation, lossless.
    pub fn implementation() -> LevelScheme {
        LevelScheme {
            omega_s: 10.0,
            omega_r: vec![40.0],
            g: 8.5,
            delta: 33.0,
            v_rf: 65.0,
            gamma_c: 0.75,
            gamma_p: 0.0,
            gamma_r: 0.0,
            light_shift_compensation: true,
        }
    }

    pub fn validate(&self, encoding: Encoding) -> Result<()> {
        let vals = [self.omega_s, self.g, self.delta, self.v_rf, self.gamma_c, self.gamma_p, self.gamma_r];
        if vals.iter().chain(&self.omega_r).any(|v| !v.is_finite()) {
            return Err(Error::Validation("level scheme contains a non-finite value".into()));
        }
        if self.gamma_c < 0.0 || self.gamma_p < 0.0 || self.gamma_r < 0.0 {
            return Err(Error::Validation("decay rates must be non-negative".into()));
        }
        if self.delta == 0.0 {
            return Err(Error::Validation("one-photon detuning must be non-zero".into()));
        }
        let colors = match encoding {
            Encoding::FourQubit => 1,
            Encoding::SixQubit => 2,
        };
        if self.omega_r.len() != colors {
            return Err(Error::Validation(format!(
                "{encoding:?} needs {colors} Rydberg color(s), got {}",
                self.omega_r.len()
            )));
        }
        Ok(())
    }

    /// Photon escape rate `2Γ_c` in rad/µs.
    pub fn cavity_loss_rate(&self) -> f64 {
        2.0 * crate::units::mhz_to_rad_us(self.gamma_c)
    }

    /// Per-color frequency offsets (2π×MHz). When color k is resonant, color
    /// j sits `2(j − k)|V|` away and shifts `r` by
    /// `(Ω_j²/4)/(2(j − k)|V| − Δ)`; color k is offset by minus the sum.
    pub fn color_offsets(&self) -> Vec<f64> {
        let n = self.omega_r.len();
        if n < 2 || !self.light_shift_compensation {
            return vec![0.0; n];
        }
        (0..n)
            .map(|k| {
                -(0..n)
                    .filter(|&j| j != k)
                    .map(|j| {
                        let gap = 2.0 * (j as f64 - k as f64) * self.v_rf.abs() - self.delta;
                        0.25 * self.omega_r[j] * self.omega_r[j] / gap
                    })
                    .sum::<f64>()
            })
            .collect()
    }

    /// Light shift scale `ε = Ω_r²/4Δ` of the first color.
    pub fn epsilon(&self) -> f64 {
        self.omega_r[0].powi(2) / (4.0 * self.delta)
    }
}

/// Gaussian s-pulses `Ω_s(t) = Ω_s Σ_k exp(−(t − t_k)²/σ²)` at
/// `t₁ = T/2` and `t₂ = 3T/2`. The early window is `[0, T)`, the late window
/// `[T, 2T]`; the Rydberg lasers are on in the early window only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSchedule {
    pub sigma_us: f64,
    /// Pulse separation `T`; `None` uses `8σ`.
    #[serde(default)]
    pub separation_us: Option<f64>,
    /// Spacing of stored samples used for bin overlaps.
    #[serde(default = "default_sample_step")]
    pub sample_step_us: f64,
}

fn default_sample_step() -> f64 {
    0.002
}

impl PulseSchedule {
    pub fn gaussian(sigma_us: f64) -> PulseSchedule {
        PulseSchedule { sigma_us, separation_us: None, sample_step_us: default_sample_step() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_us > 0.0 && self.sigma_us.is_finite()) {
            return Err(Error::Validation(format!("pulse width σ = {} µs must be positive", self.sigma_us)));
        }
        if self.separation() < 5.0 * self.sigma_us {
            return Err(Error::Validation(format!(
                "pulse separation {} µs is below 5σ = {} µs; the windows would overlap",
                self.separation(),
                5.0 * self.sigma_us
            )));
        }
        if !(self.sample_step_us > 0.0) || self.sample_step_us > self.sigma_us / 4.0 {
            return Err(Error::Validation(format!(
                "sample step {} µs must be positive and at most σ/4",
                self.sample_step_us
            )));
        }
        Ok(())
    }

    pub fn separation(&self) -> f64 {
        self.separation_us.unwrap_or(8.0 * self.sigma_us)
    }

    pub fn end(&self) -> f64 {
        2.0 * self.separation()
    }

    /// Samples per window, rounded so the late grid is the early grid shifted by `T`.
    pub fn samples_per_window(&self) -> usize {
        let n = (self.separation() / self.sample_step_us).round() as usize;
        n + n % 2
    }

    /// `Ω_s(t)` in 2π×MHz per unit peak.
    pub fn envelope(&self, t: f64) -> f64 {
        let t_sep = self.separation();
        let s2 = self.sigma_us * self.sigma_us;
        (-(t - 0.5 * t_sep).powi(2) / s2).exp() + (-(t - 1.5 * t_sep).powi(2) / s2).exp()
    }
}

/// Drive seen by one branch: s-pulse envelope and whether the Rydberg colors
/// are on, as functions of time.
pub trait Drive: Sync {
    fn omega_s_envelope(&self, t: f64) -> f64;
    fn rydberg_on(&self, early: bool) -> bool;
}

impl Drive for PulseSchedule {
    fn omega_s_envelope(&self, t: f64) -> f64 {
        self.envelope(t)
    }

    fn rydberg_on(&self, early: bool) -> bool {
        early
    }
}

/// Constant drive with all lasers on throughout.
#[derive(Clone, Copy, Debug)]
pub struct ConstantDrive;

impl Drive for ConstantDrive {
    fn omega_s_envelope(&self, _t: f64) -> f64 {
        1.0
    }

    fn rydberg_on(&self, _early: bool) -> bool {
        true
    }
}

/// Two-photon detuning of the Rydberg level from each color, 2π×MHz.
///
/// Four-qubit: `δ = (S_p − 2)·V` with `V = −|V_RF|` (attractive), so
/// `|0000⟩ → −2|V|`, `|1111⟩ → +2|V|` and the `|1_L⟩` members are resonant.
/// Six-qubit: color k is resonant at `S_p = 2k − 1`, `δ_k = (2k − 1 − S_p)|V|`,
/// plus the offsets of [`LevelScheme::color_offsets`].
/// With `symmetrize` the sign of the bare detuning is dropped, `δ → |δ|`.
pub fn detuning_for_config(scheme: &LevelScheme, config: &PlaquetteConfig, symmetrize: bool) -> Vec<f64> {
    let sp = f64::from(config.plaquette_spin());
    let v = scheme.v_rf;
    let raw: Vec<f64> = match config.encoding {
        Encoding::FourQubit => vec![(2.0 - sp) * v],
        Encoding::SixQubit => vec![(1.0 - sp) * v, (3.0 - sp) * v],
    };
    let offsets = scheme.color_offsets();
    raw.into_iter().zip(offsets).map(|(d, c)| if symmetrize { d.abs() + c } else { d + c }).collect()
}

/// Hermitian `H(t)` in rad/µs on `{s,p,e,r} ⊗ {0,1}`. `detunings` are in
/// 2π×MHz, one per color. The frame co-rotates with color 1; color k ≥ 2 keeps
/// the explicit factor `exp(i(δ_k − δ₁)t)` on its coupling.
pub fn build_hamiltonian(scheme: &LevelScheme, drive: &dyn Drive, t: f64, early: bool, detunings: &[f64]) -> DMatrix<C64> {
    let mut h = DMatrix::<C64>::zeros(DIM, DIM);
    fill_hamiltonian(scheme, drive, t, early, detunings, h.as_mut_slice());
    h
}

/// Writes `H(t)` column-major into `out` (length `DIM²`).
pub(crate) fn fill_hamiltonian(
    scheme: &LevelScheme,
    drive: &dyn Drive,
    t: f64,
    early: bool,
    detunings: &[f64],
    out: &mut [C64],
) {
    out.iter_mut().for_each(|x| *x = C64::default());
    let mut set = |i: usize, j: usize, v: C64| {
        out[i + DIM * j] += v;
        if i != j {
            out[j + DIM * i] += v.conj();
        }
    };
    let w = mhz_to_rad_us;
    let omega_s = 0.5 * w(scheme.omega_s) * drive.omega_s_envelope(t);
    let g = 0.5 * w(scheme.g);
    for n in 0..2 {
        set(idx(Level::P, n), idx(Level::P, n), C64::new(w(scheme.delta), 0.0));
        set(idx(Level::R, n), idx(Level::R, n), C64::new(w(detunings[0]), 0.0));
        set(idx(Level::P, n), idx(Level::S, n), C64::new(omega_s, 0.0));
    }
    // Jaynes–Cummings: |e,1⟩⟨p,0| + h.c., photon number capped at one.
    set(idx(Level::E, 1), idx(Level::P, 0), C64::new(g, 0.0));
    if drive.rydberg_on(early) {
        for (k, (&om, &d)) in scheme.omega_r.iter().zip(detunings).enumerate() {
            let phase = if k == 0 { C64::new(1.0, 0.0) } else { C64::from_polar(1.0, w(d - detunings[0]) * t) };
            for n in 0..2 {
                set(idx(Level::R, n), idx(Level::P, n), phase * (0.5 * w(om)));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(enc: Encoding, label: &str) -> PlaquetteConfig {
        PlaquetteConfig::parse(enc, label).unwrap()
    }

    #[test]
    fn four_qubit_detunings() {
        let s = LevelScheme::implementation();
        let d = |l: &str| detuning_for_config(&s, &config(Encoding::FourQubit, l), false)[0];
        assert_eq!((d("0000"), d("1111"), d("0101"), d("1010")), (-130.0, 130.0, 0.0, 0.0));
        assert_eq!(detuning_for_config(&s, &config(Encoding::FourQubit, "0000"), true), vec![130.0]);
    }

    #[test]
    fn six_qubit_colors() {
        let mut s = LevelScheme::implementation();
        s.omega_r = vec![40.0, 40.0];
        let offsets = s.color_offsets();
        assert!((offsets[0] + 400.0 / 97.0).abs() < 1e-12 && (offsets[1] - 400.0 / 163.0).abs() < 1e-12);
        s.light_shift_compensation = false;
        assert_eq!(s.color_offsets(), vec![0.0, 0.0]);
        for c in Encoding::SixQubit.configurations() {
            let d = detuning_for_config(&s, &c, false);
            let resonant = d.iter().filter(|x| **x == 0.0).count();
            if c.plaquette_spin() % 2 == 1 {
                assert_eq!(resonant, 1);
                assert!(d.iter().all(|x| *x == 0.0 || x.abs() == 2.0 * s.v_rf));
            } else {
                assert!(d.iter().all(|x| x.abs() >= s.v_rf));
            }
        }
    }

    #[test]
    fn hamiltonian_matrix_elements() {
        let s = LevelScheme::implementation();
        let h = build_hamiltonian(&s, &ConstantDrive, 0.3, true, &[7.0]);
        let w = mhz_to_rad_us;
        let at = |a: (Level, usize), b: (Level, usize)| h[(idx(a.0, a.1), idx(b.0, b.1))];
        assert_eq!(at((Level::P, 0), (Level::E, 1)).re, 0.5 * w(8.5));
        assert_eq!(at((Level::P, 0), (Level::S, 0)).re, 0.5 * w(10.0));
        assert_eq!(at((Level::R, 0), (Level::P, 0)).re, 0.5 * w(40.0));
        assert_eq!(at((Level::P, 1), (Level::P, 1)).re, w(33.0));
        assert_eq!(at((Level::R, 0), (Level::R, 0)).re, w(7.0));
        assert_eq!(at((Level::E, 0), (Level::P, 1)), C64::default());
        assert!((&h - h.adjoint()).norm() == 0.0);
        let late = build_hamiltonian(&s, &ConstantDrive, 0.3, false, &[7.0]);
        assert_eq!(late, h);
        let sched = PulseSchedule::gaussian(1.0);
        let off = build_hamiltonian(&s, &sched, 12.0, false, &[7.0]);
        assert_eq!(off[(idx(Level::R, 0), idx(Level::P, 0))], C64::default());
    }

    #[test]
    fn schedule_validation() {
        assert!(PulseSchedule::gaussian(3.5).validate().is_ok());
        assert!(PulseSchedule { separation_us: Some(2.0), ..PulseSchedule::gaussian(1.0) }.validate().is_err());
        assert!(PulseSchedule::gaussian(-1.0).validate().is_err());
        let s = PulseSchedule::gaussian(3.5);
        assert!((s.envelope(14.0) - 1.0).abs() < 1e-12);
        assert_eq!(s.samples_per_window() % 2, 0);
    }
}
