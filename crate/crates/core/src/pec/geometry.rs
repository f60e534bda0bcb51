//! Plaquette geometry, spin-dependent lattice traps and per-site level shifts.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{cartesian_to_spherical, PecModel, Point};
use crate::exec::Exec;
use crate::gate::Encoding;
use crate::units::{hartree_to_mhz, nm_to_bohr, AMU_KG, PLANCK};
use crate::{Error, Result};

/// Optical lattice model at the potential level.
///
/// Along `z` the two circular components give `V± = U_z sin²(k z ± θ)`; qubit
/// state `q` sees `w₊ V₊ + w₋ V₋` with `(w₊, w₋) = spin_weights[q]`, which is
/// again a `sin²` lattice with a reduced depth and a shifted minimum. The
/// relative angle `θ` is fixed by the requested displacement `D_z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapModel {
    pub depth_xy_mhz: f64,
    pub depth_z_mhz: f64,
    pub wavelength_xy_nm: f64,
    pub wavelength_z_nm: f64,
    pub mass_amu: f64,
    /// `[w₊, w₋]` for qubit states `|0⟩` and `|1⟩`.
    pub spin_weights: [[f64; 2]; 2],
}

impl Default for TrapModel {
    fn default() -> Self {
        TrapModel {
            depth_xy_mhz: 5.0,
            depth_z_mhz: 2.0,
            wavelength_xy_nm: 340.0,
            wavelength_z_nm: 870.0,
            mass_amu: 132.905_451_961,
            spin_weights: [[0.25, 0.75], [1.0, 0.0]],
        }
    }
}

impl TrapModel {
    pub fn validate(&self) -> Result<()> {
        for (q, w) in self.spin_weights.iter().enumerate() {
            if (w[0] + w[1] - 1.0).abs() > 1e-12 || w[0] < 0.0 || w[1] < 0.0 {
                return Err(Error::Validation(format!("spin weights for |{q}⟩ must be non-negative and sum to 1")));
            }
        }
        let positive = [self.depth_xy_mhz, self.depth_z_mhz, self.wavelength_xy_nm, self.wavelength_z_nm, self.mass_amu];
        if positive.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Validation("trap depths, wavelengths and mass must be positive".into()));
        }
        Ok(())
    }

    fn mass_kg(&self) -> f64 {
        self.mass_amu * AMU_KG
    }

    /// Harmonic angular frequency (rad/µs) at the bottom of `U sin²(2π x/λ)`.
    pub fn harmonic_frequency(&self, depth_mhz: f64, wavelength_nm: f64) -> f64 {
        let k = 2.0 * PI / (wavelength_nm * 1e-9);
        let u = depth_mhz * 1e6 * PLANCK;
        (2.0 * u * k * k / self.mass_kg()).sqrt() * 1e-6
    }

    /// Position spread (nm) of the harmonic ground state at angular frequency `omega` (rad/µs).
    pub fn ground_width_nm(&self, omega: f64) -> f64 {
        let hbar = PLANCK / (2.0 * PI);
        (hbar / (2.0 * self.mass_kg() * omega * 1e6)).sqrt() * 1e9
    }

    /// `(amplitude, phase)` of `w₊ e^{2iθ} + w₋ e^{−2iθ}` for qubit `q`.
    fn spin_lattice(&self, q: usize, theta: f64) -> (f64, f64) {
        let [wp, wm] = self.spin_weights[q];
        let z = wp * C64::from_polar(1.0, 2.0 * theta) + wm * C64::from_polar(1.0, -2.0 * theta);
        (z.norm(), z.arg())
    }

    /// Polarization angle `θ` that separates the two qubit lattices by `dz_nm`.
    pub fn polarization_angle(&self, dz_nm: f64) -> Result<f64> {
        let k = 2.0 * PI / self.wavelength_z_nm;
        let target = 2.0 * k * dz_nm.abs();
        let sep = |t: f64| {
            let d = self.spin_lattice(1, t).1 - self.spin_lattice(0, t).1;
            d.rem_euclid(2.0 * PI)
        };
        let (mut lo, mut hi) = (0.0, PI / 4.0);
        if !(target <= sep(hi)) {
            return Err(Error::Validation(format!("D_z = {dz_nm} nm is not reachable with these spin weights")));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sep(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Depth along `z` seen by qubit `q` when the lattices are separated by `dz_nm`.
    pub fn depth_z_for(&self, q: usize, dz_nm: f64) -> Result<f64> {
        let theta = self.polarization_angle(dz_nm)?;
        Ok(self.depth_z_mhz * self.spin_lattice(q, theta).0)
    }

    /// Ground-state widths `(σ_x, σ_y, σ_z)` in nm for qubit state `q`.
    pub fn ground_state_widths(&self, q: usize, dz_nm: f64) -> Result<[f64; 3]> {
        let sxy = self.ground_width_nm(self.harmonic_frequency(self.depth_xy_mhz, self.wavelength_xy_nm));
        let sz = self.ground_width_nm(self.harmonic_frequency(self.depth_z_for(q, dz_nm)?, self.wavelength_z_nm));
        Ok([sxy, sxy, sz])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaquetteGeometry {
    pub encoding: Encoding,
    /// Central atom to nearest plaquette site, in the lattice plane.
    pub in_plane_constant_nm: f64,
    /// Displacement along `z` between the `|0⟩` and `|1⟩` lattices.
    pub dz_nm: f64,
    #[serde(default)]
    pub trap: TrapModel,
}

impl Default for PlaquetteGeometry {
    fn default() -> Self {
        PlaquetteGeometry { encoding: Encoding::FourQubit, in_plane_constant_nm: 170.0, dz_nm: 150.0, trap: TrapModel::default() }
    }
}

impl PlaquetteGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.in_plane_constant_nm > 0.0) || !(self.dz_nm.abs() < self.in_plane_constant_nm) {
            return Err(Error::Validation("need in_plane_constant > 0 and |D_z| < in_plane_constant".into()));
        }
        self.trap.validate()
    }

    /// Cartesian position (nm) of `site` for qubit state `q`. The central atom
    /// shares the `|0⟩` plane; `|1⟩` sites sit `D_z` above it.
    pub fn site_position(&self, site: usize, q: usize) -> [f64; 3] {
        let n = self.encoding.sites();
        let phi = 2.0 * PI * site as f64 / n as f64;
        let a = self.in_plane_constant_nm;
        let z = if q == 0 { 0.0 } else { self.dz_nm };
        [a * phi.cos(), a * phi.sin(), z]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftMode {
    Point,
    /// Average over the motional ground state with a 3-point Gauss-Hermite rule per axis.
    GaussianAveraged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteShift {
    pub qubit: usize,
    pub mode: ShiftMode,
    /// Level shift of the followed branch, 2π×MHz (negative is attractive).
    pub shift_mhz: f64,
    /// Shift at the nominal site position.
    pub point_mhz: f64,
    pub center_overlap: f64,
    pub widths_nm: [f64; 3],
    pub nodes: usize,
}

fn to_point(p_nm: [f64; 3]) -> Point {
    cartesian_to_spherical(nm_to_bohr(p_nm[0]), nm_to_bohr(p_nm[1]), nm_to_bohr(p_nm[2]))
}

/// Level shift of the center state caused by one perturber on site 0 in
/// qubit state `q`. The branch is chosen by overlap with the unperturbed center
/// state at the nominal site, then followed to each quadrature node.
pub fn site_shift(model: &PecModel, geometry: &PlaquetteGeometry, q: usize, mode: ShiftMode, exec: Exec) -> Result<SiteShift> {
    geometry.validate()?;
    if q > 1 {
        return Err(Error::Validation(format!("qubit state must be 0 or 1, got {q}")));
    }
    let site = geometry.site_position(0, q);
    let widths = geometry.trap.ground_state_widths(q, geometry.dz_nm)?;
    let nominal = to_point(site);
    let r_max = model.max_radius();
    let reach = match mode {
        ShiftMode::Point => nominal.0,
        ShiftMode::GaussianAveraged => {
            let d = widths.iter().map(|w| 3f64.sqrt() * w).map(nm_to_bohr).fold(0.0, |a, b| a + b * b).sqrt();
            nominal.0 + d
        }
    };
    if reach > r_max {
        return Err(Error::Extrapolation(format!(
            "site reaches R = {reach:.0} a0, beyond the tabulated wavefunction edge {r_max:.0} a0"
        )));
    }
    let (e0, ov, reference) = model.follow(&[nominal], &model.center_vector())?;
    let point_mhz = hartree_to_mhz(e0);
    let (shift, nodes) = match mode {
        ShiftMode::Point => (point_mhz, 1),
        ShiftMode::GaussianAveraged => {
            // Nodes 0, ±√3 σ with weights 2/3, 1/6 integrate a Gaussian of spread σ.
            let rule = [(-(3f64.sqrt()), 1.0 / 6.0), (0.0, 2.0 / 3.0), (3f64.sqrt(), 1.0 / 6.0)];
            let mut nodes = Vec::with_capacity(27);
            for &(ax, wx) in &rule {
                for &(ay, wy) in &rule {
                    for &(az, wz) in &rule {
                        let p = [site[0] + ax * widths[0], site[1] + ay * widths[1], site[2] + az * widths[2]];
                        nodes.push((to_point(p), wx * wy * wz));
                    }
                }
            }
            let energies: Vec<Result<f64>> = exec.map(&nodes, |_, (p, _)| model.follow(&[*p], &reference).map(|r| r.0));
            let mut acc = 0.0;
            for (e, (_, w)) in energies.into_iter().zip(&nodes) {
                acc += w * e?;
            }
            (hartree_to_mhz(acc), nodes.len())
        }
    };
    Ok(SiteShift { qubit: q, mode, shift_mhz: shift, point_mhz, center_overlap: ov, widths_nm: widths, nodes })
}
