//! Fermi-pseudopotential potential energy curves.
//!
//! A ground-state perturber at `R` shifts the Rydberg levels through
//! `V = 2π a_s(k) δ(r−R) + 6π a_p³(k) ∇⃖·∇⃗ δ(r−R)` with `a_s = −tan δ_s / k` and
//! `a_p³ = −tan δ_p / k³`. Matrix elements are taken between fine-structure
//! spinors; the contact interaction conserves the electron spin, so each
//! element sums over the two spin components. Energies are Hartree inside
//! this module and 2π×MHz in [`PecCurve`].

mod cache;
mod curve;
mod geometry;

pub use cache::{cache_key, write_curve_csv, write_metadata, PecCache};
pub use curve::{pec_curve, BranchTie, PecCurve, PecMeta};
pub use geometry::{site_shift, PlaquetteGeometry, ShiftMode, SiteShift, TrapModel};

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::atomic::{PhaseShiftModel, SpeciesData};
use crate::exec::Exec;
use crate::wavefunctions::{orbital_gradient, orbital_value, orbital_letter, radial_solve, GridSpec, RadialWave, RydbergState};
use crate::{Error, Half, Result};

/// Spherical point `(r, θ, φ)` in Bohr and radians.
pub type Point = (f64, f64, f64);

pub fn cartesian_to_spherical(x: f64, y: f64, z: f64) -> Point {
    let r = (x * x + y * y + z * z).sqrt();
    let theta = if r == 0.0 { 0.0 } else { (z / r).clamp(-1.0, 1.0).acos() };
    (r, theta, y.atan2(x))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ManifoldSpec {
    Level { n: u32, l: u32, j: Half },
    /// All `l_min ≤ l < n`, both `j`.
    Hydrogenic { n: u32, l_min: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSpec {
    pub manifolds: Vec<ManifoldSpec>,
    /// Keep sublevels with `|m_j| ≤ m_max`.
    pub m_max: f64,
}

impl BasisSpec {
    /// `(n−2)H + nD3/2 + nD5/2 + (n+1)P + (n+2)S` around an `nD` center.
    pub fn around_d(n: u32, m_max: f64) -> BasisSpec {
        BasisSpec {
            manifolds: vec![
                ManifoldSpec::Hydrogenic { n: n - 2, l_min: 3 },
                ManifoldSpec::Level { n, l: 2, j: Half(3) },
                ManifoldSpec::Level { n, l: 2, j: Half(5) },
                ManifoldSpec::Level { n: n + 1, l: 1, j: Half(1) },
                ManifoldSpec::Level { n: n + 1, l: 1, j: Half(3) },
                ManifoldSpec::Level { n: n + 2, l: 0, j: Half(1) },
            ],
            m_max,
        }
    }

    fn describe(&self) -> String {
        let parts: Vec<String> = self
            .manifolds
            .iter()
            .map(|m| match m {
                ManifoldSpec::Level { n, l, j } => format!("{n}{}{j}", orbital_letter(*l)),
                ManifoldSpec::Hydrogenic { n, l_min } => format!("{n}H(l≥{l_min})"),
            })
            .collect();
        format!("{}, |m|≤{}", parts.join(" + "), self.m_max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Basis {
    pub states: Vec<RydbergState>,
    pub description: String,
}

impl Basis {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, s: &RydbergState) -> Option<usize> {
        self.states.iter().position(|x| x == s)
    }

    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(serde_json::to_vec(&self.states).expect("states serialize")))
    }
}

/// Expands the manifolds in order (`l`, then `j`, then `m` ascending) and drops
/// repeats. The center state must be part of the result.
pub fn build_basis(center: &RydbergState, spec: &BasisSpec) -> Result<Basis> {
    if !(spec.m_max >= 0.5) {
        return Err(Error::Validation(format!("m_max = {} keeps no sublevel", spec.m_max)));
    }
    let mut states = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut push_level = |n: u32, l: u32, j: Half| -> Result<()> {
        let top = j.0.min((2.0 * spec.m_max).floor() as i32);
        let mut m2 = -top;
        while m2 <= top {
            if m2.rem_euclid(2) == 1 {
                let s = RydbergState::new(n, l, j, Half(m2))?;
                if seen.insert(s) {
                    states.push(s);
                }
            }
            m2 += 1;
        }
        Ok(())
    };
    for m in &spec.manifolds {
        match *m {
            ManifoldSpec::Level { n, l, j } => push_level(n, l, j)?,
            ManifoldSpec::Hydrogenic { n, l_min } => {
                for l in l_min..n {
                    if l > 0 {
                        push_level(n, l, Half(2 * l as i32 - 1))?;
                    }
                    push_level(n, l, Half(2 * l as i32 + 1))?;
                }
            }
        }
    }
    if states.is_empty() {
        return Err(Error::Validation("basis specification produces no states".into()));
    }
    if !states.contains(center) {
        return Err(Error::Validation(format!("basis does not contain the center state {}", center.label())));
    }
    Ok(Basis { states, description: spec.describe() })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KValue {
    pub k: f64,
    /// The point lies beyond the classical turning point and `k` was floored.
    pub floored: bool,
}

/// Local electron momentum from `k²/2 = −1/(2n*²) + 1/R`, floored at its
/// value at `0.999 · R_turn` with `R_turn = 2n*²`.
pub fn semiclassical_k(r: f64, n_star: f64) -> Result<KValue> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("k(R) needs R > 0, got {r}")));
    }
    let raw = 2.0 * (-0.5 / (n_star * n_star) + 1.0 / r);
    let turn = 2.0 * n_star * n_star;
    let floor = (2.0 * (-0.5 / (n_star * n_star) + 1.0 / (0.999 * turn))).sqrt();
    Ok(KValue { k: raw.max(0.0).sqrt().max(floor), floored: raw <= 0.0 })
}

/// Two-component fine-structure orbital `Σ_ms ⟨l m−ms; ½ ms|j m⟩ R Y_l^{m−ms} χ_ms`.
#[derive(Clone, Debug)]
pub struct SpinorOrbital {
    pub state: RydbergState,
    pub radial: Arc<RadialWave>,
    /// `(m_l, Clebsch-Gordan)` for spin up and spin down.
    parts: [(i32, f64); 2],
}

impl SpinorOrbital {
    pub fn new(state: RydbergState, radial: Arc<RadialWave>) -> SpinorOrbital {
        let l = f64::from(state.l);
        let m = state.m.value();
        let plus = ((l + m + 0.5) / (2.0 * l + 1.0)).max(0.0).sqrt();
        let minus = ((l - m + 0.5) / (2.0 * l + 1.0)).max(0.0).sqrt();
        let (up, down) = if state.j.0 == 2 * state.l as i32 + 1 { (plus, minus) } else { (-minus, plus) };
        let ml_up = (state.m.0 - 1) / 2;
        let ml_down = (state.m.0 + 1) / 2;
        SpinorOrbital { state, radial, parts: [(ml_up, up), (ml_down, down)] }
    }

    pub fn clebsch_gordan(&self) -> [(i32, f64); 2] {
        self.parts
    }

    fn active(&self) -> impl Iterator<Item = (usize, i32, f64)> + '_ {
        let l = self.state.l as i32;
        self.parts.iter().enumerate().filter(move |(_, (ml, c))| ml.abs() <= l && *c != 0.0).map(|(s, &(ml, c))| (s, ml, c))
    }

    pub fn value(&self, p: Point) -> Result<[C64; 2]> {
        let mut out = [C64::default(); 2];
        for (s, ml, c) in self.active() {
            out[s] = c * orbital_value(&self.radial, ml, p)?;
        }
        Ok(out)
    }

    pub fn gradient(&self, p: Point) -> Result<[[C64; 3]; 2]> {
        let mut out = [[C64::default(); 3]; 2];
        for (s, ml, c) in self.active() {
            let g = orbital_gradient(&self.radial, ml, p)?;
            out[s] = [c * g[0], c * g[1], c * g[2]];
        }
        Ok(out)
    }
}

/// Contact-interaction prefactors `(−2π tan δ_s / k, −6π tan δ_p / k³)` in atomic units.
pub fn contact_strengths(model: &PhaseShiftModel, k: f64) -> Result<(f64, f64)> {
    let (ts, tp) = model.phase_shifts(k)?;
    Ok((-2.0 * PI * ts / k, -6.0 * PI * tp / k.powi(3)))
}

/// `⟨a|V(R)|b⟩` for one perturber at `point`, with `k` from the center state's `n*`.
pub fn pseudopotential_element(
    a: &SpinorOrbital,
    b: &SpinorOrbital,
    point: Point,
    model: &PhaseShiftModel,
    n_star: f64,
) -> Result<C64> {
    let k = semiclassical_k(point.0, n_star)?.k;
    let (cs, cp) = contact_strengths(model, k)?;
    let (va, vb) = (a.value(point)?, b.value(point)?);
    let (ga, gb) = (a.gradient(point)?, b.gradient(point)?);
    let mut acc = C64::default();
    for s in 0..2 {
        acc += cs * va[s].conj() * vb[s];
        for c in 0..3 {
            acc += cp * ga[s][c].conj() * gb[s][c];
        }
    }
    Ok(acc)
}

/// Basis, orbitals and unperturbed energies for repeated diagonalization.
#[derive(Clone, Debug)]
pub struct PecModel {
    pub center: RydbergState,
    pub basis: Basis,
    pub orbitals: Vec<SpinorOrbital>,
    /// Unperturbed energies relative to the center state, Hartree.
    pub energies: Vec<f64>,
    pub center_index: usize,
    pub n_star: f64,
    pub phase_shifts: PhaseShiftModel,
    pub grid: GridSpec,
    pub species_hash: String,
}

impl PecModel {
    pub fn new(species: &SpeciesData, center: RydbergState, basis: Basis, grid: GridSpec, exec: Exec) -> Result<PecModel> {
        let center_index = basis
            .index_of(&center)
            .ok_or_else(|| Error::Validation(format!("basis does not contain {}", center.label())))?;
        let mut levels: BTreeMap<(u32, u32, Half), ()> = BTreeMap::new();
        for s in &basis.states {
            levels.insert((s.n, s.l, s.j), ());
        }
        let keys: Vec<(u32, u32, Half)> = levels.into_keys().collect();
        let waves: Vec<Result<RadialWave>> = exec.map(&keys, |_, &(n, l, j)| {
            let m = if j.0 >= 1 { Half(1) } else { Half(-1) };
            radial_solve(species, &RydbergState::new(n, l, j, m)?, &grid)
        });
        let mut table = BTreeMap::new();
        for (key, w) in keys.iter().zip(waves) {
            table.insert(*key, Arc::new(w?));
        }
        let e0 = species.level_energy(center.n, center.l, center.j)?;
        let mut energies = Vec::with_capacity(basis.len());
        let mut orbitals = Vec::with_capacity(basis.len());
        for s in &basis.states {
            energies.push(species.level_energy(s.n, s.l, s.j)? - e0);
            orbitals.push(SpinorOrbital::new(*s, table[&(s.n, s.l, s.j)].clone()));
        }
        Ok(PecModel {
            n_star: species.effective_principal(center.n, center.l, center.j)?,
            center,
            basis,
            orbitals,
            energies,
            center_index,
            phase_shifts: species.phase_shifts.clone(),
            grid,
            species_hash: species.content_hash(),
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Outermost radius where the center-state wavefunction is tabulated.
    pub fn max_radius(&self) -> f64 {
        self.orbitals[self.center_index].radial.r_max()
    }

    /// `H = diag(E) + Σ_p V(R_p)` in Hartree.
    pub fn hamiltonian(&self, perturbers: &[Point]) -> Result<DMatrix<C64>> {
        let n = self.dim();
        let mut h = DMatrix::<C64>::zeros(n, n);
        for (i, e) in self.energies.iter().enumerate() {
            h[(i, i)] = C64::new(*e, 0.0);
        }
        for &p in perturbers {
            let k = semiclassical_k(p.0, self.n_star)?.k;
            let (cs, cp) = contact_strengths(&self.phase_shifts, k)?;
            // Rows of the rank-8 factor: sqrt-weighted spin components of ψ and ∇ψ.
            let mut vals = Vec::with_capacity(n);
            let mut grads = Vec::with_capacity(n);
            for o in &self.orbitals {
                vals.push(o.value(p)?);
                grads.push(o.gradient(p)?);
            }
            for a in 0..n {
                for b in a..n {
                    let mut acc = C64::default();
                    for s in 0..2 {
                        acc += cs * vals[a][s].conj() * vals[b][s];
                        for c in 0..3 {
                            acc += cp * grads[a][s][c].conj() * grads[b][s][c];
                        }
                    }
                    h[(a, b)] += acc;
                    if a != b {
                        h[(b, a)] += acc.conj();
                    }
                }
            }
        }
        Ok(h)
    }

    /// Eigenvalues (ascending, Hartree) and eigenvectors as columns.
    pub fn diagonalize(&self, perturbers: &[Point]) -> Result<(Vec<f64>, DMatrix<C64>)> {
        let h = self.hamiltonian(perturbers)?;
        Ok(sorted_eigen(h))
    }

    /// Energy of the eigenvector closest to `reference` (Hartree) and that overlap.
    pub fn follow(&self, perturbers: &[Point], reference: &[C64]) -> Result<(f64, f64, Vec<C64>)> {
        let (vals, vecs) = self.diagonalize(perturbers)?;
        let (best, ov) = best_overlap(&vecs, reference).0;
        Ok((vals[best], ov, vecs.column(best).iter().copied().collect()))
    }

    pub fn center_vector(&self) -> Vec<C64> {
        let mut v = vec![C64::default(); self.dim()];
        v[self.center_index] = C64::new(1.0, 0.0);
        v
    }
}

pub(crate) fn sorted_eigen(h: DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = h.nrows();
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::<C64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// `((best index, best overlap), second overlap)` with overlaps `|⟨ref|v_i⟩|²`.
pub(crate) fn best_overlap(vecs: &DMatrix<C64>, reference: &[C64]) -> ((usize, f64), (usize, f64)) {
    let mut best = (0, -1.0);
    let mut second = (0, -1.0);
    for j in 0..vecs.ncols() {
        let mut dot = C64::default();
        for (i, r) in reference.iter().enumerate() {
            if *r != C64::default() {
                dot += r.conj() * vecs[(i, j)];
            }
        }
        let ov = dot.norm_sqr();
        if ov > best.1 {
            second = best;
            best = (j, ov);
        } else if ov > second.1 {
            second = (j, ov);
        }
    }
    (best, second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefunctions::spherical_harmonic;

    fn d52(m2: i32) -> RydbergState {
        RydbergState::new(45, 2, Half(5), Half(m2)).unwrap()
    }

    #[test]
    fn single_level_basis_has_all_sublevels() {
        let spec = BasisSpec { manifolds: vec![ManifoldSpec::Level { n: 45, l: 2, j: Half(5) }], m_max: 10.0 };
        assert_eq!(build_basis(&d52(5), &spec).unwrap().len(), 6);
        let spec = BasisSpec { m_max: 1.5, ..spec };
        assert_eq!(build_basis(&d52(3), &spec).unwrap().len(), 4);
        assert!(build_basis(&d52(5), &spec).is_err());
    }

    #[test]
    fn desk_count_matches_closed_form() {
        let spec = BasisSpec::around_d(45, 3.0);
        let b = build_basis(&d52(5), &spec).unwrap();
        // Sublevels kept for a given j: 2·min(j, m_max) + 1 over half-odd m.
        let kept = |j2: i32| {
            let top = j2.min(6);
            (if top % 2 == 0 { top - 1 } else { top } + 1) as usize
        };
        let mut expect = kept(3) + kept(5) + kept(1) + kept(3) + kept(1);
        for l in 3..43 {
            expect += kept(2 * l - 1) + kept(2 * l + 1);
        }
        assert_eq!(b.len(), expect);
        assert_eq!(b.len(), 498);
        assert!(b.description.starts_with("43H"));
    }

    #[test]
    fn full_manifold_count() {
        let spec = BasisSpec::around_d(45, 45.0);
        let b = build_basis(&d52(5), &spec).unwrap();
        assert_eq!(b.len(), 3698);
    }

    #[test]
    fn momentum_limits_and_monotonicity() {
        let ns: f64 = 42.5;
        let near = semiclassical_k(ns * ns, ns).unwrap();
        assert!((near.k - (2.0 / (ns * ns) - 1.0 / (ns * ns)).sqrt()).abs() < 1e-15);
        let tiny = semiclassical_k(1e-6, ns).unwrap();
        assert!((tiny.k / (2.0f64 / 1e-6).sqrt() - 1.0).abs() < 1e-6);
        let mut prev = f64::INFINITY;
        let turn = 2.0 * ns * ns;
        for i in 1..400 {
            let r = turn * i as f64 / 400.0;
            let k = semiclassical_k(r, ns).unwrap();
            assert!(k.k < prev && !k.floored);
            prev = k.k;
        }
        let beyond = semiclassical_k(1.5 * turn, ns).unwrap();
        assert!(beyond.floored && beyond.k > 0.0);
        assert!(semiclassical_k(0.0, ns).is_err());
    }

    #[test]
    fn clebsch_gordan_known_values() {
        let w = Arc::new(radial_solve(&SpeciesData::hydrogenic(), &RydbergState::new(2, 1, Half(1), Half(1)).unwrap(), &GridSpec::default()).unwrap());
        let p12 = SpinorOrbital::new(RydbergState::new(2, 1, Half(1), Half(1)).unwrap(), w.clone());
        let [(ml_u, cu), (ml_d, cd)] = p12.clebsch_gordan();
        assert_eq!((ml_u, ml_d), (0, 1));
        assert!((cu + (1.0f64 / 3.0).sqrt()).abs() < 1e-15 && (cd - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let stretched = SpinorOrbital::new(RydbergState::new(2, 1, Half(3), Half(3)).unwrap(), w);
        let [(_, cu), (_, cd)] = stretched.clebsch_gordan();
        assert_eq!((cu, cd), (1.0, 0.0));
    }

    fn cs_model(spec: BasisSpec) -> PecModel {
        let cs = SpeciesData::bundled("cs133").unwrap();
        let b = build_basis(&d52(5), &spec).unwrap();
        PecModel::new(&cs, d52(5), b, GridSpec::default(), Exec::Parallel).unwrap()
    }

    #[test]
    fn stretched_diagonal_matches_direct_evaluation() {
        let spec = BasisSpec { manifolds: vec![ManifoldSpec::Level { n: 45, l: 2, j: Half(5) }], m_max: 2.5 };
        let model = cs_model(spec);
        let r = crate::units::nm_to_bohr(170.0);
        let p = (r, PI / 2.0, 0.0);
        let o = &model.orbitals[model.center_index];
        let elem = pseudopotential_element(o, o, p, &model.phase_shifts, model.n_star).unwrap();

        // |45D5/2, 5/2⟩ = R Y_2^2 χ↑ exactly; at θ = π/2 the θ-derivative of Y_2^2 vanishes.
        let (rr, drr) = o.radial.radial(r);
        let y2 = 15.0 / (32.0 * PI);
        let k2 = 2.0 * (1.0 / r - 0.5 / (model.n_star * model.n_star));
        let k = k2.sqrt();
        let a = -21.7;
        let alpha = 402.2;
        let ts = -a * k - PI * alpha / 3.0 * k2;
        let tp = PI * alpha / 15.0 * k2 + 1.3 * k.powi(3) / (2.94e-4 - 0.5 * k2);
        let direct = -2.0 * PI * ts / k * rr * rr * y2 - 6.0 * PI * tp / k.powi(3) * (drr * drr + 4.0 * rr * rr / (r * r)) * y2;
        assert!((elem.re - direct).abs() < 1e-12 * direct.abs() && elem.im.abs() < 1e-14 * direct.abs(), "{elem} vs {direct}");
        assert!(spherical_harmonic(2, 2, PI / 2.0, 0.0).unwrap().re > 0.0);
    }

    #[test]
    fn element_vanishes_at_s_state_node_without_p_wave() {
        let mut h = SpeciesData::hydrogenic();
        h.phase_shifts.p_wave = crate::atomic::PWaveModel::Table { k_au: vec![1e-3, 10.0], tan_delta: vec![0.0, 0.0], tan_max: 50.0 };
        let s = RydbergState::new(2, 0, Half(1), Half(1)).unwrap();
        let o = SpinorOrbital::new(s, Arc::new(radial_solve(&h, &s, &GridSpec::default()).unwrap()));
        // R_20 has its node at r = 2.
        let e = pseudopotential_element(&o, &o, (2.0, 0.7, 0.1), &h.phase_shifts, 2.0).unwrap();
        assert!(e.norm() < 1e-8, "{e}");
    }

    #[test]
    fn hamiltonian_hermitian_and_matches_elements() {
        let spec = BasisSpec { manifolds: vec![ManifoldSpec::Hydrogenic { n: 43, l_min: 38 }, ManifoldSpec::Level { n: 45, l: 2, j: Half(5) }, ManifoldSpec::Level { n: 46, l: 1, j: Half(3) }], m_max: 3.0 };
        let model = cs_model(spec);
        let p = (3000.0, 1.1, 0.4);
        let h = model.hamiltonian(&[p]).unwrap();
        let scale = h.iter().fold(0.0f64, |m, x| m.max(x.norm()));
        for a in 0..model.dim() {
            for b in 0..model.dim() {
                assert!((h[(a, b)] - h[(b, a)].conj()).norm() <= 1e-14 * scale);
            }
        }
        for (a, b) in [(0usize, 5usize), (3, model.dim() - 1), (model.center_index, 2)] {
            let e = pseudopotential_element(&model.orbitals[a], &model.orbitals[b], p, &model.phase_shifts, model.n_star).unwrap();
            let diag = if a == b { model.energies[a] } else { 0.0 };
            assert!((h[(a, b)] - e - diag).norm() <= 1e-12 * scale);
        }
    }
}
