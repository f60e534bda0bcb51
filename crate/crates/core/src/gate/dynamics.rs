//! Branch time evolution.
//!
//! Every plaquette configuration evolves independently under its own
//! detuning. The non-Hermitian evolution uses
//! `H̃ = H − iΓ_c n̂ − i(γ_p/2)σ_pp − i(γ_r/2)σ_rr`, so photons escape at
//! `2Γ_c` while `γ_p`, `γ_r` are population rates; the norm that leaves
//! through the cavity is accrued into early/late emission records, the rest
//! into loss records, so the books close to one. The Lindblad evolution keeps
//! the decayed population explicitly: `p → s` reinsertion, `r →` a lost
//! level, and cavity emission into `|e,0⟩` tagged by window.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::scheme::{fill_hamiltonian, idx, Drive, Level, LevelScheme, DIM};
use crate::integrate::{integrate, Stats, Tolerance};
use crate::units::mhz_to_rad_us;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Nonhermitian,
    Lindblad,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "nonhermitian" => Ok(Mode::Nonhermitian),
            "lindblad" => Ok(Mode::Lindblad),
            _ => Err(Error::Validation(format!("unknown mode {s:?} (expected nonhermitian or lindblad)"))),
        }
    }
}

/// Sampled non-Hermitian evolution of one branch.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<[C64; DIM]>,
    pub emitted_early: f64,
    pub emitted_late: f64,
    pub lost_p: f64,
    pub lost_r: f64,
    pub stats: Stats,
}

impl Trajectory {
    pub fn final_norm(&self) -> f64 {
        self.states.last().map_or(1.0, |s| s.iter().map(|a| a.norm_sqr()).sum())
    }

    /// `|ψ|² + emitted + lost − 1` at the end.
    pub fn bookkeeping_defect(&self) -> f64 {
        self.final_norm() + self.emitted_early + self.emitted_late + self.lost_p + self.lost_r - 1.0
    }

    pub fn population(&self, level: Level, n: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[idx(level, n)].norm_sqr()).collect()
    }
}

/// `Φ(t) = 2Γ_c |c_{e,1}(t)|²` in µs⁻¹ on the trajectory samples.
pub fn photon_flux(trajectory: &Trajectory, scheme: &LevelScheme) -> Vec<f64> {
    let gamma = scheme.cavity_loss_rate();
    trajectory.population(Level::E, 1).into_iter().map(|p| gamma * p).collect()
}

/// `√(2Γ_c) c_{e,1}(t)`: amplitude of a photon leaving at `t` with the atom in `|e,0⟩`.
pub fn emission_amplitude(trajectory: &Trajectory, scheme: &LevelScheme) -> Vec<C64> {
    let root = scheme.cavity_loss_rate().sqrt();
    trajectory.states.iter().map(|s| s[idx(Level::E, 1)] * root).collect()
}

fn check_times(times: &[f64], split: f64) -> Result<()> {
    if times.len() < 2 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Validation("sample times must be strictly increasing".into()));
    }
    if split > times[0] && split < times[times.len() - 1] && !times.contains(&split) {
        return Err(Error::Validation("the window boundary must be one of the sample times".into()));
    }
    Ok(())
}

/// Runs `[t ≤ split]` as the early window and the rest as the late window.
fn segments(times: &[f64], split: f64) -> [(&[f64], bool); 2] {
    let cut = times.iter().position(|&t| t > split).unwrap_or(times.len());
    let early = &times[..cut];
    let late_start = if cut > 0 && cut < times.len() { cut - 1 } else { cut };
    [(early, true), (&times[late_start..], false)]
}

/// Non-Hermitian evolution from `psi0` at `times[0]`, sampled at `times`.
pub fn evolve(
    scheme: &LevelScheme,
    drive: &dyn Drive,
    detunings: &[f64],
    psi0: [C64; DIM],
    times: &[f64],
    split: f64,
    tol: &Tolerance,
) -> Result<Trajectory> {
    check_times(times, split)?;
    let gc = scheme.cavity_loss_rate();
    let gp = mhz_to_rad_us(scheme.gamma_p);
    let gr = mhz_to_rad_us(scheme.gamma_r);
    // Amplitudes followed by records [early, late, lost_p, lost_r].
    let mut y = vec![C64::default(); DIM + 4];
    y[..DIM].copy_from_slice(&psi0);
    let mut states = Vec::with_capacity(times.len());
    let mut stats = Stats::default();
    let mut h = vec![C64::default(); DIM * DIM];
    for (seg, early) in segments(times, split) {
        if seg.is_empty() {
            continue;
        }
        let skip_first = !states.is_empty();
        let record = if early { DIM } else { DIM + 1 };
        let rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
            fill_hamiltonian(scheme, drive, t, early, detunings, &mut h);
            for i in 0..DIM {
                let mut acc = C64::default();
                for j in 0..DIM {
                    acc += h[i + DIM * j] * y[j];
                }
                dy[i] = C64::new(acc.im, -acc.re);
            }
            for n in 0..2 {
                for lv in [Level::S, Level::P, Level::E, Level::R] {
                    let i = idx(lv, n);
                    let rate = n as f64 * gc
                        + if lv == Level::P { gp } else { 0.0 }
                        + if lv == Level::R { gr } else { 0.0 };
                    dy[i] -= y[i] * (0.5 * rate);
                }
            }
            let photon: f64 = (0..4).map(|l| y[2 * l + 1].norm_sqr()).sum::<f64>() * gc;
            let p_pop: f64 = (0..2).map(|n| y[idx(Level::P, n)].norm_sqr()).sum();
            let r_pop: f64 = (0..2).map(|n| y[idx(Level::R, n)].norm_sqr()).sum();
            for k in DIM..DIM + 4 {
                dy[k] = C64::default();
            }
            dy[record] = C64::new(photon, 0.0);
            dy[DIM + 2] = C64::new(gp * p_pop, 0.0);
            dy[DIM + 3] = C64::new(gr * r_pop, 0.0);
        };
        let s = integrate(rhs, &mut y, seg[0], seg, tol, |t, y| {
            if skip_first && t == seg[0] {
                return;
            }
            let mut s = [C64::default(); DIM];
            s.copy_from_slice(&y[..DIM]);
            states.push(s);
        })?;
        stats.accepted += s.accepted;
        stats.rejected += s.rejected;
        stats.error_estimate += s.error_estimate;
    }
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        emitted_early: y[DIM].re,
        emitted_late: y[DIM + 1].re,
        lost_p: y[DIM + 2].re,
        lost_r: y[DIM + 3].re,
        stats,
    })
}

/// Level order of a Lindblad block.
pub mod block {
    pub const S0: usize = 0;
    pub const P0: usize = 1;
    pub const R0: usize = 2;
    pub const E1: usize = 3;
    /// `|e,0⟩` after an early emission.
    pub const EARLY: usize = 4;
    /// `|e,0⟩` after a late emission.
    pub const LATE: usize = 5;
    /// Population removed by Rydberg decay.
    pub const LOST: usize = 6;
    pub const DIM: usize = 7;
}

/// Final Lindblad block `ρ_{cc'}` (row-major, `block::DIM²`) for branches
/// with detunings `da` (rows) and `db` (columns), from `|s,0⟩⟨s,0|`.
pub fn lindblad_block(
    scheme: &LevelScheme,
    drive: &dyn Drive,
    da: &[f64],
    db: &[f64],
    t0: f64,
    split: f64,
    t_end: f64,
    tol: &Tolerance,
) -> Result<(Vec<C64>, Stats)> {
    use block::*;
    const MAP: [usize; 4] = [idx(Level::S, 0), idx(Level::P, 0), idx(Level::R, 0), idx(Level::E, 1)];
    let gc = scheme.cavity_loss_rate();
    let gp = mhz_to_rad_us(scheme.gamma_p);
    let gr = mhz_to_rad_us(scheme.gamma_r);
    let mut rho = vec![C64::default(); DIM * DIM];
    rho[S0 * DIM + S0] = C64::new(1.0, 0.0);
    let mut stats = Stats::default();
    let mut ha = vec![C64::default(); super::scheme::DIM * super::scheme::DIM];
    let mut hb = ha.clone();
    let windows = [(t0, split.min(t_end), true), (split.max(t0), t_end, false)];
    for (a, b, early) in windows {
        if b <= a {
            continue;
        }
        let target = if early { EARLY } else { LATE };
        let decays = [(gc, E1, target), (gp, P0, S0), (gr, R0, LOST)];
        let rhs = |t: f64, r: &[C64], dr: &mut [C64]| {
            fill_hamiltonian(scheme, drive, t, early, da, &mut ha);
            fill_hamiltonian(scheme, drive, t, early, db, &mut hb);
            let n8 = super::scheme::DIM;
            dr.iter_mut().for_each(|x| *x = C64::default());
            // −i(H_a ρ − ρ H_b) on the coherent 4×4 corner and its couplings.
            for i in 0..DIM {
                for j in 0..DIM {
                    let mut acc = C64::default();
                    if i < 4 {
                        for k in 0..4 {
                            acc += ha[MAP[i] + n8 * MAP[k]] * r[k * DIM + j];
                        }
                    }
                    if j < 4 {
                        for k in 0..4 {
                            acc -= r[i * DIM + k] * hb[MAP[k] + n8 * MAP[j]];
                        }
                    }
                    dr[i * DIM + j] = C64::new(acc.im, -acc.re);
                }
            }
            for &(rate, from, to) in &decays {
                if rate == 0.0 {
                    continue;
                }
                dr[to * DIM + to] += r[from * DIM + from] * rate;
                for k in 0..DIM {
                    dr[from * DIM + k] -= r[from * DIM + k] * (0.5 * rate);
                    dr[k * DIM + from] -= r[k * DIM + from] * (0.5 * rate);
                }
            }
        };
        let s = integrate(rhs, &mut rho, a, &[b], tol, |_, _| {})?;
        stats.accepted += s.accepted;
        stats.rejected += s.rejected;
        stats.error_estimate += s.error_estimate;
    }
    Ok((rho, stats))
}
