//! Motional adiabaticity of plaquette atoms while the central atom carries
//! Rydberg population.
//!
//! Along `z` a plaquette atom in qubit state `q` sits in
//! `U(z, t) = U_q sin²(k(z − z_q)) + P(t) V(z)`, with `P = (Ω_s(t)/Ω_r)²` the
//! dark-state Rydberg population during the early window. The local trap
//! frequency `ω(t)` comes from the curvature at the instantaneous minimum; the
//! margin is `|ω̇|/ω²`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::exec::Exec;
use crate::gate::{LevelScheme, PulseSchedule};
use crate::pec::{cartesian_to_spherical, PecModel, PlaquetteGeometry, TrapModel};
use crate::units::{hartree_to_mhz, nm_to_bohr, AMU_KG, PLANCK};
use crate::{Error, Result};

/// Level shift `V(z)` (2π×MHz) along the vertical line through a site, with a
/// natural cubic spline through the samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VrfProfile {
    pub z_nm: Vec<f64>,
    pub shift_mhz: Vec<f64>,
    /// Spline second derivatives at the samples.
    #[serde(skip)]
    curvature: Vec<f64>,
}

impl VrfProfile {
    pub fn new(z_nm: Vec<f64>, shift_mhz: Vec<f64>) -> Result<VrfProfile> {
        if z_nm.len() != shift_mhz.len() || z_nm.len() < 4 {
            return Err(Error::Validation("a V_RF profile needs at least four (z, V) samples".into()));
        }
        if z_nm.windows(2).any(|w| w[1] <= w[0]) || shift_mhz.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("profile z must increase strictly and V must be finite".into()));
        }
        let curvature = natural_spline(&z_nm, &shift_mhz);
        Ok(VrfProfile { z_nm, shift_mhz, curvature })
    }

    /// Follows the center-state branch along `z` through site 0 of `geometry`
    /// in qubit state `q`, over `±half_width_nm` in `points` samples.
    pub fn from_pec(
        model: &PecModel,
        geometry: &PlaquetteGeometry,
        q: usize,
        half_width_nm: f64,
        points: usize,
        exec: Exec,
    ) -> Result<VrfProfile> {
        if points < 4 {
            return Err(Error::Validation("need at least four profile points".into()));
        }
        let site = geometry.site_position(0, q);
        let zs: Vec<f64> =
            (0..points).map(|i| site[2] - half_width_nm + 2.0 * half_width_nm * i as f64 / (points - 1) as f64).collect();
        let point = |z: f64| cartesian_to_spherical(nm_to_bohr(site[0]), nm_to_bohr(site[1]), nm_to_bohr(z));
        if let Some(z) = zs.iter().find(|&&z| point(z).0 > model.max_radius()) {
            return Err(Error::Extrapolation(format!("profile point z = {z} nm lies beyond the wavefunction grid")));
        }
        let (_, _, nominal) = model.follow(&[point(site[2])], &model.center_vector())?;
        // Each sample follows the branch selected at the nominal site.
        let shifts: Vec<Result<f64>> =
            exec.map(&zs, |_, &z| model.follow(&[point(z)], &nominal).map(|(e, _, _)| hartree_to_mhz(e)));
        VrfProfile::new(zs, shifts.into_iter().collect::<Result<_>>()?)
    }

    /// Same shape, rescaled so that `V(z) = value_mhz` at `z`.
    pub fn scaled_to(&self, z: f64, value_mhz: f64) -> Result<VrfProfile> {
        let (v, _, _) = self.eval(z)?;
        if v == 0.0 {
            return Err(Error::Domain("cannot rescale a profile that vanishes at the reference point".into()));
        }
        let f = value_mhz / v;
        VrfProfile::new(self.z_nm.clone(), self.shift_mhz.iter().map(|x| x * f).collect())
    }

    /// `(V, V', V'')` in MHz, MHz/nm and MHz/nm².
    pub fn eval(&self, z: f64) -> Result<(f64, f64, f64)> {
        let (lo, hi) = (self.z_nm[0], *self.z_nm.last().expect("non-empty"));
        if !(z >= lo && z <= hi) {
            return Err(Error::Extrapolation(format!("z = {z} nm outside the profile [{lo}, {hi}]")));
        }
        let curvature = if self.curvature.len() == self.z_nm.len() {
            std::borrow::Cow::Borrowed(&self.curvature)
        } else {
            std::borrow::Cow::Owned(natural_spline(&self.z_nm, &self.shift_mhz))
        };
        let i = self.z_nm.partition_point(|&x| x <= z).clamp(1, self.z_nm.len() - 1) - 1;
        let (x0, x1) = (self.z_nm[i], self.z_nm[i + 1]);
        let (y0, y1) = (self.shift_mhz[i], self.shift_mhz[i + 1]);
        let (m0, m1) = (curvature[i], curvature[i + 1]);
        let h = x1 - x0;
        let a = (x1 - z) / h;
        let b = (z - x0) / h;
        let v = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let dv = (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        let d2v = a * m0 + b * m1;
        Ok((v, dv, d2v))
    }
}

/// Second derivatives of the natural cubic spline (Thomas algorithm).
fn natural_spline(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
        c[i] = h1 / diag;
        d[i] = (rhs - h0 * d[i - 1]) / diag;
    }
    for i in (1..n - 1).rev() {
        m[i] = d[i] - c[i] * m[i + 1];
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticityOptions {
    pub threshold: f64,
    /// Time samples across the early window.
    pub samples: usize,
}

impl Default for AdiabaticityOptions {
    fn default() -> Self {
        AdiabaticityOptions { threshold: 0.1, samples: 4001 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticityReport {
    pub times_us: Vec<f64>,
    /// Trap angular frequency along `z`, rad/µs.
    pub omega: Vec<f64>,
    pub z_min_nm: Vec<f64>,
    pub margin: Vec<f64>,
    pub max_margin: f64,
    pub t_at_max_us: f64,
    pub threshold: f64,
    pub passed: bool,
    /// Set when the total potential stops confining.
    pub failure: Option<String>,
}

/// Margin time series for a plaquette atom in qubit state `q`.
pub fn adiabaticity_check(
    trap: &TrapModel,
    dz_nm: f64,
    q: usize,
    profile: &VrfProfile,
    scheme: &LevelScheme,
    schedule: &PulseSchedule,
    options: &AdiabaticityOptions,
) -> Result<AdiabaticityReport> {
    trap.validate()?;
    schedule.validate()?;
    if q > 1 || options.samples < 5 || !(options.threshold > 0.0) {
        return Err(Error::Validation("need q ∈ {0, 1}, at least 5 samples and a positive threshold".into()));
    }
    let omega_r2: f64 = scheme.omega_r.iter().map(|x| x * x).sum();
    if omega_r2 == 0.0 {
        return Err(Error::Validation("Rydberg population is undefined without Ω_r".into()));
    }
    let depth = trap.depth_z_for(q, dz_nm)?;
    let k = 2.0 * PI / trap.wavelength_z_nm;
    let z_site = if q == 0 { 0.0 } else { dz_nm };
    // MHz/nm² → (rad/µs)²: h·1e6 Hz · 1e18 nm⁻²·m² / m, then 1e-12 for µs⁻².
    let to_omega2 = PLANCK * 1e6 * 1e18 / (trap.mass_amu * AMU_KG) * 1e-12;

    let t_end = schedule.separation();
    let n = options.samples;
    let times: Vec<f64> = (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect();
    let mut omega = Vec::with_capacity(n);
    let mut z_min = Vec::with_capacity(n);
    let mut z = z_site;
    let mut failure = None;
    for &t in &times {
        let pop = (scheme.omega_s * schedule.envelope(t)).powi(2) / omega_r2;
        let curvature = |z: f64| -> Result<(f64, f64)> {
            let (_, dv, d2v) = profile.eval(z)?;
            let s = (2.0 * k * (z - z_site)).sin();
            let c = (2.0 * k * (z - z_site)).cos();
            Ok((depth * k * s + pop * dv, 2.0 * depth * k * k * c + pop * d2v))
        };
        // Newton from the previous minimum.
        let mut ok = false;
        for _ in 0..50 {
            let (g1, g2) = curvature(z)?;
            if !(g2 > 0.0) {
                break;
            }
            let step = g1 / g2;
            z -= step;
            if step.abs() < 1e-10 {
                ok = true;
                break;
            }
        }
        let (_, g2) = curvature(z)?;
        if !ok || !(g2 > 0.0) {
            failure = Some(format!("total potential is not confining at t = {t:.6} µs (z = {z:.3} nm)"));
            break;
        }
        omega.push((g2 * to_omega2).sqrt());
        z_min.push(z);
    }
    let m = omega.len();
    let mut margin = vec![0.0; m];
    for i in 0..m {
        let (a, b) = (i.saturating_sub(1), (i + 1).min(m - 1));
        if b > a {
            margin[i] = ((omega[b] - omega[a]) / (times[b] - times[a])).abs() / (omega[i] * omega[i]);
        }
    }
    let (imax, max_margin) = margin.iter().copied().enumerate().fold((0, 0.0), |acc, (i, x)| if x > acc.1 { (i, x) } else { acc });
    Ok(AdiabaticityReport {
        times_us: times[..m].to_vec(),
        omega,
        z_min_nm: z_min,
        margin,
        max_margin,
        t_at_max_us: times[imax],
        threshold: options.threshold,
        passed: failure.is_none() && max_margin < options.threshold,
        failure,
    })
}
