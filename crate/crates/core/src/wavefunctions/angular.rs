use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::RadialWave;
use crate::{Error, Result};

/// Gradients with `m ≠ 0` are refused this close (radians) to the z axis.
pub const POLE_EXCLUSION: f64 = 1e-6;

/// Normalized associated Legendre function including the Condon-Shortley
/// phase, `Y_l^m(θ, 0)` for `m ≥ 0`.
fn legendre_normalized(l: u32, m: u32, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let mut pmm = (0.25 / PI).sqrt();
    for k in 1..=m {
        let kf = f64::from(k);
        pmm *= -((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * s;
    }
    if l == m {
        return pmm;
    }
    let mf = f64::from(m);
    let mut p_prev = pmm;
    let mut p = (2.0 * mf + 3.0).sqrt() * c * pmm;
    for ll in (m + 2)..=l {
        let lf = f64::from(ll);
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
        let next = a * (c * p - b * p_prev);
        p_prev = p;
        p = next;
    }
    p
}

/// `Y_l^m(θ, φ)`, orthonormal on the sphere, Condon-Shortley phase convention.
pub fn spherical_harmonic(l: u32, m: i32, theta: f64, phi: f64) -> Result<C64> {
    if m.unsigned_abs() > l {
        return Err(Error::Domain(format!("|m|={} exceeds l={l}", m.abs())));
    }
    Ok(ylm(l, m, theta, phi))
}

fn ylm(l: u32, m: i32, theta: f64, phi: f64) -> C64 {
    if m.unsigned_abs() > l {
        return C64::new(0.0, 0.0);
    }
    let p = legendre_normalized(l, m.unsigned_abs(), theta);
    let val = C64::from_polar(p, f64::from(m.abs()) * phi);
    if m >= 0 {
        val
    } else {
        // Y_l^{-m} = (-1)^m conj(Y_l^m)
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        sign * val.conj()
    }
}

/// `∂Y_l^m/∂θ` from the ladder recombination of `Y_l^{m±1}`.
pub fn spherical_harmonic_dtheta(l: u32, m: i32, theta: f64, phi: f64) -> Result<C64> {
    if m.unsigned_abs() > l {
        return Err(Error::Domain(format!("|m|={} exceeds l={l}", m.abs())));
    }
    let (lf, mf) = (f64::from(l), f64::from(m));
    let up = ((lf - mf) * (lf + mf + 1.0)).sqrt();
    let down = ((lf + mf) * (lf - mf + 1.0)).sqrt();
    let e = C64::from_polar(1.0, phi);
    Ok(0.5 * (up * e.conj() * ylm(l, m + 1, theta, phi) - down * e * ylm(l, m - 1, theta, phi)))
}

/// `ψ = R_l(r) Y_l^m(θ, φ)`.
pub fn orbital_value(radial: &RadialWave, m: i32, point: (f64, f64, f64)) -> Result<C64> {
    let (r, theta, phi) = point;
    let (rr, _) = radial.radial(r);
    Ok(rr * spherical_harmonic(radial.l, m, theta, phi)?)
}

/// Spherical components `(∂_r ψ, r⁻¹ ∂_θ ψ, (r sinθ)⁻¹ ∂_φ ψ)` of `∇ψ`.
pub fn orbital_gradient(radial: &RadialWave, m: i32, point: (f64, f64, f64)) -> Result<[C64; 3]> {
    let (r, theta, phi) = point;
    let l = radial.l;
    if m.unsigned_abs() > l {
        return Err(Error::Domain(format!("|m|={} exceeds l={l}", m.abs())));
    }
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!("θ={theta} outside [0, π]")));
    }
    if !(r > 0.0) {
        return Err(Error::Domain(format!("gradient needs r > 0, got {r}")));
    }
    let sin = theta.sin();
    if m != 0 && (theta < POLE_EXCLUSION || PI - theta < POLE_EXCLUSION) {
        return Err(Error::Domain(format!("θ={theta} is within the pole exclusion for m={m}")));
    }
    let (rr, drr) = radial.radial(r);
    let y = ylm(l, m, theta, phi);
    let dy = spherical_harmonic_dtheta(l, m, theta, phi)?;
    let radial_part = drr * y;
    let theta_part = rr * dy / r;
    let phi_part = if m == 0 { C64::new(0.0, 0.0) } else { C64::new(0.0, f64::from(m)) * rr * y / (r * sin) };
    Ok([radial_part, theta_part, phi_part])
}
