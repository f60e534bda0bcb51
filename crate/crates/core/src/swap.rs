//! Entanglement swapping between two photon–logical pairs: photonic CZ
//! followed by a projective measurement of both photons in the `|±⟩` basis.
//!
//! Qubit states use `|±⟩ = (|1⟩ ± |0⟩)/√2` with `early ≡ 0` and `late ≡ 1`.
//! The CZ negates `|late, late⟩`. For ideal inputs the photon outcomes herald
//!
//! | outcome | logical pair | amplitude |
//! |---------|--------------|-----------|
//! | `++`    | `ψ̃⁻`         | `+1/2`    |
//! | `−−`    | `φ̃⁺`         | `−1/2`    |
//! | `−+`    | `ψ̃⁺`         | `−1/2`    |
//! | `+−`    | `φ̃⁻`         | `−1/2`    |
//!
//! with the rotated Bell states `φ̃± = (|1⟩|+⟩ ± |0⟩|−⟩)/√2` and
//! `ψ̃± = (|0⟩|+⟩ ± |1⟩|−⟩)/√2`.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::gate::{logical_projector, Encoding, JointState};
use crate::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotatedBell {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl RotatedBell {
    pub const ALL: [RotatedBell; 4] = [RotatedBell::PhiPlus, RotatedBell::PhiMinus, RotatedBell::PsiPlus, RotatedBell::PsiMinus];

    /// Amplitudes over `|ab⟩`, index `2a + b`.
    pub fn vector(self) -> [f64; 4] {
        let plus = pm(true);
        let minus = pm(false);
        let (first, second, sign) = match self {
            RotatedBell::PhiPlus => (1, 0, 1.0),
            RotatedBell::PhiMinus => (1, 0, -1.0),
            RotatedBell::PsiPlus => (0, 1, 1.0),
            RotatedBell::PsiMinus => (0, 1, -1.0),
        };
        let mut v = [0.0; 4];
        for b in 0..2 {
            v[2 * first + b] += FRAC_1_SQRT_2 * plus[b];
            v[2 * second + b] += sign * FRAC_1_SQRT_2 * minus[b];
        }
        v
    }
}

/// `|+⟩` or `|−⟩` over `{|0⟩, |1⟩}`.
fn pm(plus: bool) -> [f64; 2] {
    if plus {
        [FRAC_1_SQRT_2, FRAC_1_SQRT_2]
    } else {
        [-FRAC_1_SQRT_2, FRAC_1_SQRT_2]
    }
}

/// The four rotated Bell states.
pub fn rotated_bell_basis() -> [(RotatedBell, [f64; 4]); 4] {
    RotatedBell::ALL.map(|b| (b, b.vector()))
}

/// Photon measurement outcome `|s₁ s₂⟩`, `true` for `+`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BellOutcome {
    pub first_plus: bool,
    pub second_plus: bool,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome { first_plus: true, second_plus: true },
        BellOutcome { first_plus: false, second_plus: false },
        BellOutcome { first_plus: false, second_plus: true },
        BellOutcome { first_plus: true, second_plus: false },
    ];

    pub fn label(self) -> String {
        let s = |p: bool| if p { '+' } else { '-' };
        format!("{}{}", s(self.first_plus), s(self.second_plus))
    }

    /// Logical Bell state heralded by this outcome for ideal inputs.
    pub fn heralded(self) -> RotatedBell {
        match (self.first_plus, self.second_plus) {
            (true, true) => RotatedBell::PsiMinus,
            (false, false) => RotatedBell::PhiPlus,
            (false, true) => RotatedBell::PsiPlus,
            (true, false) => RotatedBell::PhiMinus,
        }
    }

    fn photon_vector(self) -> [f64; 4] {
        let (a, b) = (pm(self.first_plus), pm(self.second_plus));
        [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
    }
}

/// Logical register of one terminal: a `dim`-dimensional space holding the
/// codewords `|0_L⟩`, `|1_L⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct Register {
    pub encoding: Option<Encoding>,
    pub codewords: [DVector<C64>; 2],
}

impl Register {
    /// Bare two-dimensional logical qubit.
    pub fn logical() -> Register {
        Register {
            encoding: None,
            codewords: [DVector::from_vec(vec![ONE, ZERO]), DVector::from_vec(vec![ZERO, ONE])],
        }
    }

    /// Physical configuration space of `encoding`.
    pub fn physical(encoding: Encoding) -> Register {
        let configs = encoding.configurations();
        let [w0, w1] = logical_projector(encoding, &configs);
        let lift = |w: Vec<f64>| DVector::from_iterator(w.len(), w.into_iter().map(|x| C64::new(x, 0.0)));
        Register { encoding: Some(encoding), codewords: [lift(w0), lift(w1)] }
    }

    pub fn dim(&self) -> usize {
        self.codewords[0].len()
    }
}

/// Density operator over `register₁ ⊗ photon₁ ⊗ register₂ ⊗ photon₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartitePair {
    pub registers: [Register; 2],
    pub rho: DMatrix<C64>,
}

impl BipartitePair {
    pub fn new(registers: [Register; 2], rho: DMatrix<C64>) -> Result<BipartitePair> {
        let n = 4 * registers[0].dim() * registers[1].dim();
        if rho.nrows() != n || rho.ncols() != n {
            return Err(Error::Validation(format!("density operator must be {n}×{n}")));
        }
        let tr: C64 = rho.diagonal().iter().sum();
        if (tr - ONE).norm() > 1e-9 || (&rho - rho.adjoint()).norm() > 1e-9 {
            return Err(Error::Validation(format!("density operator must be Hermitian with unit trace (trace {tr})")));
        }
        Ok(BipartitePair { registers, rho })
    }

    /// Product of two single-terminal states, each a density operator over
    /// `register ⊗ photon` with the photon as the fast index.
    pub fn product(registers: [Register; 2], sides: [&DMatrix<C64>; 2]) -> Result<BipartitePair> {
        for (r, s) in registers.iter().zip(sides) {
            if s.nrows() != 2 * r.dim() || s.ncols() != 2 * r.dim() {
                return Err(Error::Validation("terminal state does not match its register".into()));
            }
        }
        BipartitePair::new(registers, sides[0].kronecker(sides[1]))
    }

    /// `(|0_L⟩|early⟩ + |1_L⟩|late⟩)/√2` on both terminals.
    pub fn ideal(registers: [Register; 2]) -> BipartitePair {
        let side = |r: &Register| terminal_ideal(r);
        let (a, b) = (side(&registers[0]), side(&registers[1]));
        let psi = a.kronecker(&b);
        let rho = &psi * psi.adjoint();
        BipartitePair { registers, rho }
    }

    fn index(&self, c1: usize, p1: usize, c2: usize, p2: usize) -> usize {
        ((c1 * 2 + p1) * self.registers[1].dim() + c2) * 2 + p2
    }

    /// Photon labels `(p1, p2)` of every basis index.
    fn photons(&self) -> Vec<(usize, usize)> {
        let d2 = self.registers[1].dim();
        (0..self.rho.nrows()).map(|i| ((i / (2 * d2)) % 2, i % 2)).collect()
    }
}

fn terminal_ideal(r: &Register) -> DVector<C64> {
    let d = r.dim();
    let mut v = DVector::from_element(2 * d, ZERO);
    for c in 0..d {
        v[2 * c] = r.codewords[0][c] * FRAC_1_SQRT_2;
        v[2 * c + 1] = r.codewords[1][c] * FRAC_1_SQRT_2;
    }
    v
}

/// `CZ` on the two photons: `diag(1, 1, 1, −1)` over `{early, late}²`.
pub fn apply_photonic_cz(pair: &BipartitePair) -> BipartitePair {
    let sign: Vec<f64> = pair.photons().into_iter().map(|(a, b)| if a == 1 && b == 1 { -1.0 } else { 1.0 }).collect();
    let rho = DMatrix::from_fn(pair.rho.nrows(), pair.rho.ncols(), |i, j| pair.rho[(i, j)] * (sign[i] * sign[j]));
    BipartitePair { registers: pair.registers.clone(), rho }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub outcome: BellOutcome,
    pub probability: f64,
    /// Unnormalized register state `⟨o|ρ|o⟩` over `register₁ ⊗ register₂`.
    pub unnormalized: DMatrix<C64>,
    /// Normalized register state; `None` for a zero-probability outcome.
    pub state: Option<DMatrix<C64>>,
}

/// Projects both photons onto `outcome` (no CZ applied here).
pub fn project_bell(pair: &BipartitePair, outcome: BellOutcome) -> Projection {
    let (d1, d2) = (pair.registers[0].dim(), pair.registers[1].dim());
    let o = outcome.photon_vector();
    // Isometry K: (c1, c2) → Σ_{p1 p2} o(p1, p2) |c1 p1 c2 p2⟩.
    let mut k = DMatrix::<C64>::zeros(pair.rho.nrows(), d1 * d2);
    for c1 in 0..d1 {
        for c2 in 0..d2 {
            for p1 in 0..2 {
                for p2 in 0..2 {
                    k[(pair.index(c1, p1, c2, p2), c1 * d2 + c2)] = C64::new(o[2 * p1 + p2], 0.0);
                }
            }
        }
    }
    let unnormalized = k.adjoint() * &pair.rho * &k;
    let probability = unnormalized.diagonal().iter().map(|x| x.re).sum::<f64>();
    let state = (probability > 1e-300).then(|| &unnormalized / C64::new(probability, 0.0));
    Projection { outcome, probability, unnormalized, state }
}

/// Target register state for a rotated Bell state: `Σ t_ab |a_L⟩|b_L⟩`.
pub fn logical_target(registers: &[Register; 2], bell: RotatedBell) -> DVector<C64> {
    let t = bell.vector();
    let mut v = DVector::from_element(registers[0].dim() * registers[1].dim(), ZERO);
    for a in 0..2 {
        for b in 0..2 {
            v += registers[0].codewords[a].kronecker(&registers[1].codewords[b]) * C64::new(t[2 * a + b], 0.0);
        }
    }
    v
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeReport {
    pub outcome: String,
    pub heralded: RotatedBell,
    pub probability: f64,
    /// `⟨T|ρ|T⟩` of the normalized register state; `None` if never heralded.
    pub fidelity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapReport {
    pub outcomes: Vec<OutcomeReport>,
    pub total_probability: f64,
    /// Probability-weighted heralded fidelity.
    pub mean_fidelity: f64,
}

/// CZ, then all four projections, scored against the heralded targets.
pub fn swap(pair: &BipartitePair) -> SwapReport {
    let after = apply_photonic_cz(pair);
    let outcomes: Vec<OutcomeReport> = BellOutcome::ALL
        .iter()
        .map(|&o| {
            let proj = project_bell(&after, o);
            let target = logical_target(&pair.registers, o.heralded());
            let fidelity = proj.state.as_ref().map(|rho| (target.adjoint() * rho * &target)[(0, 0)].re);
            OutcomeReport { outcome: o.label(), heralded: o.heralded(), probability: proj.probability, fidelity }
        })
        .collect();
    let total_probability = outcomes.iter().map(|o| o.probability).sum();
    let mean_fidelity =
        outcomes.iter().map(|o| o.probability * o.fidelity.unwrap_or(0.0)).sum::<f64>() / f64::max(total_probability, 1e-300);
    SwapReport { outcomes, total_probability, mean_fidelity }
}

/// Terminal state over `logical ⊗ photon` (photon fast) from a gate's heralded
/// photon–logical state, whose order is `(bin, logical)`.
pub fn terminal_from_joint(joint: &JointState) -> Result<DMatrix<C64>> {
    let m = &joint.photon_logical;
    if m.len() != 4 || m.iter().any(|r| r.len() != 4) {
        return Err(Error::Validation("photon–logical state must be 4×4".into()));
    }
    // (bin, logical) → (logical, bin)
    let perm = |i: usize| (i % 2) * 2 + i / 2;
    Ok(DMatrix::from_fn(4, 4, |r, c| m[perm(r)][perm(c)]))
}

/// Composes two simulated terminals and swaps.
pub fn end_to_end(first: &JointState, second: &JointState) -> Result<SwapReport> {
    let pair = BipartitePair::product(
        [Register::logical(), Register::logical()],
        [&terminal_from_joint(first)?, &terminal_from_joint(second)?],
    )?;
    Ok(swap(&pair))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logical_pair() -> BipartitePair {
        BipartitePair::ideal([Register::logical(), Register::logical()])
    }

    #[test]
    fn rotated_bell_basis_is_orthonormal() {
        let b = rotated_bell_basis();
        for (i, (_, u)) in b.iter().enumerate() {
            for (j, (_, v)) in b.iter().enumerate() {
                let dot: f64 = u.iter().zip(v).map(|(x, y)| x * y).sum();
                assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        // Hadamard on the second qubit of (|11⟩ + |00⟩)/√2, in the basis
        // where it sends |1⟩ → |+⟩ and |0⟩ → |−⟩.
        let h = [[-FRAC_1_SQRT_2, FRAC_1_SQRT_2], [FRAC_1_SQRT_2, FRAC_1_SQRT_2]];
        let phi = [FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2];
        let mut out = [0.0; 4];
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    out[2 * a + b] += h[b][c] * phi[2 * a + c];
                }
            }
        }
        let target = RotatedBell::PhiPlus.vector();
        let dot: f64 = out.iter().zip(&target).map(|(x, y)| x * y).sum();
        assert!((dot - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ideal_state_has_equal_bell_coefficients() {
        // Coefficient of |B⟩_L|B⟩_p in (|0 e⟩ + |1 l⟩)⊗(|0 e⟩ + |1 l⟩)/2.
        for (_, v) in rotated_bell_basis() {
            let c: f64 = (0..2).map(|a| (0..2).map(|b| v[2 * a + b] * v[2 * a + b]).sum::<f64>()).sum::<f64>() / 2.0;
            assert!((c - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn cz_is_an_involution_and_negates_late_late() {
        let pair = logical_pair();
        let twice = apply_photonic_cz(&apply_photonic_cz(&pair));
        assert!((&twice.rho - &pair.rho).norm() < 1e-14);
        let once = apply_photonic_cz(&pair);
        let (ee, ll) = (pair.index(0, 0, 0, 0), pair.index(1, 1, 1, 1));
        assert!((once.rho[(ee, ll)] + pair.rho[(ee, ll)]).norm() < 1e-15);
        assert!((once.rho[(ee, ee)] - pair.rho[(ee, ee)]).norm() < 1e-15);
    }

    #[test]
    fn ideal_swap_is_exact() {
        let encodings = [Encoding::FourQubit, Encoding::SixQubit];
        let mut pairs = vec![logical_pair()];
        for a in encodings {
            for b in encodings {
                pairs.push(BipartitePair::ideal([Register::physical(a), Register::physical(b)]));
            }
        }
        for pair in pairs {
            let r = swap(&pair);
            for o in &r.outcomes {
                assert!((o.probability - 0.25).abs() < 1e-12, "{o:?}");
                assert!((o.fidelity.unwrap() - 1.0).abs() < 1e-12, "{o:?}");
            }
            assert!((r.total_probability - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dephased_terminal_halves_the_fidelity() {
        let ideal = terminal_ideal(&Register::logical());
        let pure = &ideal * ideal.adjoint();
        let dephased = DMatrix::from_fn(4, 4, |r, c| if r == c { pure[(r, c)] } else { ZERO });
        let pair = BipartitePair::product([Register::logical(), Register::logical()], [&pure, &dephased]).unwrap();
        let r = swap(&pair);
        for o in &r.outcomes {
            assert!((o.fidelity.unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_probability_outcome_has_no_state() {
        // Both photons late with logical 1: |−−⟩ and others all reachable, but
        // an empty register state never is.
        let mut rho = DMatrix::<C64>::zeros(16, 16);
        rho[(0, 0)] = ONE;
        let pair = BipartitePair::new([Register::logical(), Register::logical()], rho).unwrap();
        let p = project_bell(&pair, BellOutcome::ALL[0]);
        assert!((p.probability - 0.25).abs() < 1e-15);
        let zero = BipartitePair { rho: DMatrix::zeros(16, 16), ..pair };
        assert!(project_bell(&zero, BellOutcome::ALL[0]).state.is_none());
    }
}
