//! Reduced models of the central atom after eliminating `p`.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::gate::LevelScheme;
use crate::units::mhz_to_rad_us;
use crate::{Error, Result};

/// `H/ε` in the basis `{|+⟩, |−⟩, |r⟩}` with `|±⟩ = (|s⟩ ± |e⟩)/√2`, for
/// `g = Ω_s` and `Δ` large:
/// `−[2λ²|+⟩⟨+| + (1 − δ)|r⟩⟨r| + √2 λ(|+⟩⟨r| + h.c.)]`.
///
/// The `√2` and the factor two follow from `|+⟩` carrying both the `s` and the
/// `e` coupling to `p`; the overall sign from `Δ > 0`.
pub fn reduced_hamiltonian(lambda: f64, delta: f64) -> Matrix3<f64> {
    let c = std::f64::consts::SQRT_2 * lambda;
    -Matrix3::new(2.0 * lambda * lambda, 0.0, c, 0.0, 0.0, 0.0, c, 0.0, 1.0 - delta)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DarkBright {
    /// Energies in units of `ε = Ω_r²/4Δ`.
    pub dark_energy: f64,
    pub lower_bright_energy: f64,
    pub upper_bright_energy: f64,
    /// Components in `{|+⟩, |−⟩, |r⟩}`.
    pub dark: [f64; 3],
    pub lower_bright: [f64; 3],
    pub upper_bright: [f64; 3],
}

/// Eigenpairs of [`reduced_hamiltonian`]. The dark state is `|−⟩`; the lower
/// bright state is the `|+⟩`-like eigenvector, which for `λ, δ ≪ 1` sits at
/// `≈ 2δλ²ε`.
pub fn dark_bright_decomposition(lambda: f64, delta: f64) -> DarkBright {
    let eig = SymmetricEigen::new(reduced_hamiltonian(lambda, delta));
    let vec = |i: usize| {
        let v = eig.eigenvectors.column(i);
        let s = if v[0] + v[1] + v[2] < 0.0 { -1.0 } else { 1.0 };
        [s * v[0], s * v[1], s * v[2]]
    };
    let idx: Vec<usize> = (0..3).collect();
    let dark = *idx.iter().max_by(|&&a, &&b| eig.eigenvectors[(1, a)].abs().total_cmp(&eig.eigenvectors[(1, b)].abs())).expect("3");
    let rest: Vec<usize> = idx.into_iter().filter(|&i| i != dark).collect();
    let (lo, hi) = if eig.eigenvectors[(0, rest[0])].abs() >= eig.eigenvectors[(0, rest[1])].abs() {
        (rest[0], rest[1])
    } else {
        (rest[1], rest[0])
    };
    DarkBright {
        dark_energy: eig.eigenvalues[dark],
        lower_bright_energy: eig.eigenvalues[lo],
        upper_bright_energy: eig.eigenvalues[hi],
        dark: vec(dark),
        lower_bright: vec(lo),
        upper_bright: vec(hi),
    }
}

/// Components of a `{|+⟩, |−⟩, |r⟩}` vector in `{|s⟩, |e⟩, |r⟩}`.
pub fn to_ser(v: [f64; 3]) -> [f64; 3] {
    [FRAC_1_SQRT_2 * (v[0] + v[1]), FRAC_1_SQRT_2 * (v[0] - v[1]), v[2]]
}

/// Steady-state `s–e` coherence from the first-order closed form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyCoherence {
    pub rho_se: C64,
    /// False once `|ρ_se| > 1/2`, where a first-order result cannot hold.
    pub perturbative: bool,
}

/// `ρ_se = (Ω_s g/4Δ) · 2iδ_RF / (κ (Ω_r²/4Δ − δ_RF))` with `κ = 2Γ_c` the
/// photon escape rate: the first-order steady state with emission recycled
/// into `s`.
pub fn steady_coherence(scheme: &LevelScheme, delta_rf: f64) -> Result<SteadyCoherence> {
    if !(scheme.gamma_c > 0.0) {
        return Err(Error::Domain("steady coherence needs Γ_c > 0".into()));
    }
    let eps = scheme.epsilon();
    let gap = eps - delta_rf;
    if gap.abs() <= 1e-12 * eps.abs().max(1.0) {
        return Err(Error::Domain(format!("δ_RF = {delta_rf} sits on the light-shift pole Ω_r²/4Δ = {eps}")));
    }
    let kappa = scheme.omega_s * scheme.g / (4.0 * scheme.delta);
    let rho_se = C64::new(0.0, 2.0 * kappa * delta_rf / (2.0 * scheme.gamma_c * gap));
    Ok(SteadyCoherence { rho_se, perturbative: rho_se.norm() <= 0.5 })
}

/// Steady state of the four-level `{s, p, e, r}` model under constant drives,
/// with cavity emission recycled by the jump `√(2Γ_c) |s⟩⟨e|`, `p → s` at `γ_p`
/// and `r → s` at `γ_r`. Row-major `4 × 4` density matrix.
pub fn driven_steady_state(scheme: &LevelScheme, delta_rf: f64) -> Result<DMatrix<C64>> {
    const S: usize = 0;
    const P: usize = 1;
    const E: usize = 2;
    const R: usize = 3;
    let w = mhz_to_rad_us;
    let mut h = DMatrix::<C64>::zeros(4, 4);
    let mut couple = |a: usize, b: usize, v: f64| {
        h[(a, b)] = C64::new(v, 0.0);
        h[(b, a)] = C64::new(v, 0.0);
    };
    couple(S, P, 0.5 * w(scheme.omega_s));
    couple(R, P, 0.5 * w(scheme.omega_r[0]));
    couple(E, P, 0.5 * w(scheme.g));
    h[(P, P)] = C64::new(w(scheme.delta), 0.0);
    h[(R, R)] = C64::new(w(delta_rf), 0.0);
    let jumps = [(scheme.cavity_loss_rate(), E, S), (w(scheme.gamma_p), P, S), (w(scheme.gamma_r), R, S)];

    // Liouvillian on vec(ρ) with index 4a + b for ρ_ab.
    let n = 4;
    let mut l = DMatrix::<C64>::zeros(n * n, n * n);
    let i = C64::new(0.0, 1.0);
    for a in 0..n {
        for b in 0..n {
            let row = n * a + b;
            for k in 0..n {
                l[(row, n * k + b)] -= i * h[(a, k)];
                l[(row, n * a + k)] += i * h[(k, b)];
            }
        }
    }
    for &(rate, from, to) in &jumps {
        if rate == 0.0 {
            continue;
        }
        l[(n * to + to, n * from + from)] += C64::new(rate, 0.0);
        for k in 0..n {
            l[(n * from + k, n * from + k)] -= C64::new(0.5 * rate, 0.0);
            l[(n * k + from, n * k + from)] -= C64::new(0.5 * rate, 0.0);
        }
    }
    // Replace one equation with Tr ρ = 1.
    let mut rhs = DVector::<C64>::zeros(n * n);
    for c in 0..n * n {
        l[(0, c)] = C64::default();
    }
    for a in 0..n {
        l[(0, n * a + a)] = C64::new(1.0, 0.0);
    }
    rhs[0] = C64::new(1.0, 0.0);
    let x = l.lu().solve(&rhs).ok_or_else(|| Error::Convergence("singular Liouvillian: no unique steady state".into()))?;
    Ok(DMatrix::from_fn(n, n, |a, b| x[n * a + b]))
}

/// Two-level `|s,0⟩ ↔ |e,1⟩` reduction. Frequencies in 2π×MHz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    pub lambda: f64,
    pub delta: f64,
    pub epsilon: f64,
    /// Coupling between `|s,0⟩` and `|e,1⟩`.
    pub omega_eff: f64,
    /// `√|Ω_eff² − Γ_c²/4|`: oscillation frequency of `c_{e,1}`, or its
    /// decay-rate splitting when overdamped.
    pub omega_tilde: f64,
    pub overdamped: bool,
    /// Real part of the `e,1` energy relative to `s,0`.
    pub effective_detuning: f64,
    pub gamma_c: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevel {
    pub params: ReducedParams,
    /// Largest coupling-to-detuning ratio among `Ω_s, Ω_r, g` against `Δ, |δ_RF|`.
    pub validity: f64,
    pub in_regime: bool,
}

/// `Ω_eff = (Ω_s g/4Δ)(1 + Ω_r²/4Δδ_RF)`, effective detuning
/// `(Ω_s² − g²)/4Δ · (1 + Ω_r²/4Δδ_RF)`. `ratio` is the required
/// detuning-to-coupling factor (3 by default).
pub fn two_level_reduction(scheme: &LevelScheme, delta_rf: f64, ratio: f64) -> Result<TwoLevel> {
    let omega_r = scheme.omega_r.iter().map(|x| x * x).sum::<f64>().sqrt();
    let factor = if omega_r == 0.0 {
        1.0
    } else if delta_rf == 0.0 {
        return Err(Error::Domain("two-level reduction needs δ_RF ≠ 0 while Ω_r is on".into()));
    } else {
        1.0 + omega_r * omega_r / (4.0 * scheme.delta * delta_rf)
    };
    let omega_eff = scheme.omega_s * scheme.g / (4.0 * scheme.delta) * factor;
    let quarter = scheme.gamma_c * scheme.gamma_c / 4.0;
    let disc = omega_eff * omega_eff - quarter;
    let eps = omega_r * omega_r / (4.0 * scheme.delta);
    let couplings = scheme.omega_s.abs().max(omega_r).max(scheme.g.abs());
    let detunings = if omega_r == 0.0 { scheme.delta.abs() } else { scheme.delta.abs().min(delta_rf.abs()) };
    let validity = couplings / detunings;
    Ok(TwoLevel {
        params: ReducedParams {
            lambda: if omega_r == 0.0 { f64::INFINITY } else { scheme.omega_s / omega_r },
            delta: if eps == 0.0 { f64::INFINITY } else { delta_rf / eps },
            epsilon: eps,
            omega_eff,
            omega_tilde: disc.abs().sqrt(),
            overdamped: disc < 0.0,
            effective_detuning: (scheme.omega_s.powi(2) - scheme.g.powi(2)) / (4.0 * scheme.delta) * factor,
            gamma_c: scheme.gamma_c,
        },
        validity,
        in_regime: validity * ratio <= 1.0,
    })
}

/// `Φ(t) = 2Γ_c |c_{e,1}(t)|²` (µs⁻¹, `t` in µs) of the reduced model
/// `[[0, Ω_eff], [Ω_eff, δ_eff − iΓ_c]]` started in `|s,0⟩`. With
/// `δ_eff = 0` this is `2Γ_c (Ω_eff²/Ω̃²) e^{−Γ_c t} sin²(Ω̃ t)`.
pub fn analytic_flux(p: &ReducedParams, t: f64) -> f64 {
    let w = mhz_to_rad_us;
    let (om, d, gc) = (w(p.omega_eff), w(p.effective_detuning), w(p.gamma_c));
    if t <= 0.0 || om == 0.0 {
        return 0.0;
    }
    let m = Matrix2::new(C64::default(), C64::new(om, 0.0), C64::new(om, 0.0), C64::new(d, -gc));
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let root = (tr * tr * 0.25 - det).sqrt();
    let (mu1, mu2) = (tr * 0.5 + root, tr * 0.5 - root);
    let i = C64::new(0.0, 1.0);
    let ce = if (mu1 - mu2).norm() < 1e-9 * om {
        -i * t * om * (-i * mu1 * t).exp()
    } else {
        om * ((-i * mu1 * t).exp() - (-i * mu2 * t).exp()) / (mu1 - mu2)
    };
    2.0 * gc * ce.norm_sqr()
}

/// `∫₀^∞ Φ dt` of [`analytic_flux`]: the emitted probability, one for any
/// `Γ_c > 0` since the reduced model has no other loss.
pub fn analytic_emission(p: &ReducedParams) -> f64 {
    if p.gamma_c > 0.0 && p.omega_eff != 0.0 {
        1.0
    } else {
        0.0
    }
}
