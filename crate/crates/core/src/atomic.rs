//! Species data: quantum defects, the Rydberg constant, electron-atom
//! scattering phase shifts and spontaneous decay rates.
//!
//! Species are described by TOML files whose field names carry their units
//! (`_au` for Hartree atomic units, `_2pi_mhz` for 2π×MHz). Unknown keys are
//! rejected. `data/cs133.toml` ships with the crate and is available through
//! [`SpeciesData::bundled`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Half, Result};

const BUNDLED_CS133: &str = include_str!("../data/cs133.toml");

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DefectEntry {
    pub l: u32,
    pub j: Half,
    /// Rydberg-Ritz coefficients `[d0, d2, d4, ...]`.
    pub coefficients: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum SWaveModel {
    /// `tan δ_s = -a k - (π α / 3) k²`.
    EffectiveRange { scattering_length_au: f64, polarizability_au: f64 },
    Table { k_au: Vec<f64>, tan_delta: Vec<f64> },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum PWaveModel {
    /// `tan δ_p = (π α / 15) k² + γ k³ / (E_r - k²/2)`, clamped to `±tan_max`.
    Resonance {
        polarizability_au: f64,
        resonance_energy_au: f64,
        width_coefficient_au: f64,
        #[serde(default = "default_tan_max")]
        tan_max: f64,
    },
    Table {
        k_au: Vec<f64>,
        tan_delta: Vec<f64>,
        #[serde(default = "default_tan_max")]
        tan_max: f64,
    },
}

fn default_tan_max() -> f64 {
    50.0
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PhaseShiftModel {
    pub s_wave: SWaveModel,
    pub p_wave: PWaveModel,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpeciesData {
    pub name: String,
    #[serde(default)]
    pub version: Option<String>,
    pub mass_amu: f64,
    pub rydberg_constant_au: f64,
    #[serde(default)]
    pub quantum_defects: Vec<DefectEntry>,
    pub phase_shifts: PhaseShiftModel,
    #[serde(default)]
    pub decay_rates_2pi_mhz: BTreeMap<String, f64>,
}

pub fn load_species(path: impl AsRef<Path>) -> Result<SpeciesData> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_species(&text, path)
}

pub fn parse_species(text: &str, origin: &Path) -> Result<SpeciesData> {
    let species: SpeciesData = toml::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    species.validate().map_err(|msg| Error::Parse {
        path: origin.to_path_buf(),
        message: msg,
    })?;
    Ok(species)
}

impl SpeciesData {
    pub fn bundled(name: &str) -> Result<SpeciesData> {
        match name.to_ascii_lowercase().as_str() {
            "cs133" | "cs" => parse_species(BUNDLED_CS133, Path::new("<bundled cs133>")),
            other => Err(Error::Validation(format!("no bundled species named {other:?}"))),
        }
    }

    /// Species with every quantum defect zero and Ry = 1/2: plain hydrogen.
    pub fn hydrogenic() -> SpeciesData {
        SpeciesData {
            name: "H".into(),
            version: None,
            mass_amu: f64::INFINITY,
            rydberg_constant_au: 0.5,
            quantum_defects: Vec::new(),
            phase_shifts: PhaseShiftModel {
                s_wave: SWaveModel::EffectiveRange { scattering_length_au: -21.7, polarizability_au: 0.0 },
                p_wave: PWaveModel::Resonance {
                    polarizability_au: 0.0,
                    resonance_energy_au: 3e-4,
                    width_coefficient_au: 1.0,
                    tan_max: 50.0,
                },
            },
            decay_rates_2pi_mhz: BTreeMap::new(),
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if !(self.rydberg_constant_au > 0.0 && self.rydberg_constant_au.is_finite()) {
            return Err(format!("rydberg_constant_au must be positive, got {}", self.rydberg_constant_au));
        }
        if !(self.mass_amu > 0.0) {
            return Err("mass_amu must be positive".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for e in &self.quantum_defects {
            let ok_j = if e.l == 0 { e.j == Half(1) } else { e.j.0 == 2 * e.l as i32 - 1 || e.j.0 == 2 * e.l as i32 + 1 };
            if !ok_j {
                return Err(format!("defect entry l={} has invalid j={}", e.l, e.j));
            }
            if !seen.insert((e.l, e.j)) {
                return Err(format!("duplicate defect entry for l={} j={}", e.l, e.j));
            }
            match e.coefficients.first() {
                None => return Err(format!("defect entry l={} j={} has no coefficients", e.l, e.j)),
                Some(&d0) if d0 < 0.0 || !d0.is_finite() => {
                    return Err(format!("quantum defect for l={} j={} is negative ({d0})", e.l, e.j))
                }
                _ => {}
            }
        }
        // Leading defects must not increase with l.
        let mut by_l: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
        for e in &self.quantum_defects {
            let d0 = e.coefficients[0];
            let entry = by_l.entry(e.l).or_insert((f64::INFINITY, f64::NEG_INFINITY));
            entry.0 = entry.0.min(d0);
            entry.1 = entry.1.max(d0);
        }
        let mut prev: Option<(u32, f64)> = None;
        for (&l, &(min_d, max_d)) in &by_l {
            if let Some((pl, pmin)) = prev {
                if max_d > pmin {
                    return Err(format!("quantum defects are not monotone in l: l={l} has {max_d} > {pmin} at l={pl}"));
                }
            }
            prev = Some((l, min_d));
        }
        check_table_models(&self.phase_shifts).map_err(|m| format!("phase_shifts: {m}"))?;
        for (level, rate) in &self.decay_rates_2pi_mhz {
            if !(*rate >= 0.0) {
                return Err(format!("decay rate for {level} must be non-negative"));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, used in cache keys.
    pub fn content_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("species serializes");
        hex::encode(Sha256::digest(&json))
    }

    fn defect(&self, n: u32, l: u32, j: Half) -> f64 {
        let Some(entry) = self.quantum_defects.iter().find(|e| e.l == l && e.j == j) else {
            return 0.0;
        };
        let d0 = entry.coefficients[0];
        let x = f64::from(n) - d0;
        let inv2 = 1.0 / (x * x);
        let mut pow = 1.0;
        let mut delta = 0.0;
        for &c in &entry.coefficients {
            delta += c * pow;
            pow *= inv2;
        }
        delta
    }

    /// Effective principal number `n* = n - δ(n, l, j)`.
    pub fn effective_principal(&self, n: u32, l: u32, j: Half) -> Result<f64> {
        check_quantum_numbers(n, l, j)?;
        let n_star = f64::from(n) - self.defect(n, l, j);
        if n_star <= 0.0 {
            return Err(Error::Domain(format!("n* = {n_star} is not positive for n={n} l={l} j={j}")));
        }
        Ok(n_star)
    }

    /// Level energy `-Ry / n*²` in Hartree.
    pub fn level_energy(&self, n: u32, l: u32, j: Half) -> Result<f64> {
        let n_star = self.effective_principal(n, l, j)?;
        Ok(-self.rydberg_constant_au / (n_star * n_star))
    }
}

pub(crate) fn check_quantum_numbers(n: u32, l: u32, j: Half) -> Result<()> {
    if l >= n {
        return Err(Error::Domain(format!("l={l} must be smaller than n={n}")));
    }
    let ok_j = if l == 0 { j == Half(1) } else { j.0 == 2 * l as i32 - 1 || j.0 == 2 * l as i32 + 1 };
    if !ok_j {
        return Err(Error::Domain(format!("j={j} is not l±1/2 for l={l}")));
    }
    Ok(())
}

fn check_table(k: &[f64], t: &[f64]) -> std::result::Result<(), String> {
    if k.len() != t.len() || k.len() < 2 {
        return Err("table needs at least two (k, tan δ) rows of equal length".into());
    }
    if k.windows(2).any(|w| w[1] <= w[0]) || k[0] <= 0.0 {
        return Err("table k values must be positive and strictly increasing".into());
    }
    if t.iter().any(|x| !x.is_finite()) {
        return Err("table contains non-finite tan δ".into());
    }
    Ok(())
}

fn check_table_models(m: &PhaseShiftModel) -> std::result::Result<(), String> {
    if let SWaveModel::Table { k_au, tan_delta } = &m.s_wave {
        check_table(k_au, tan_delta)?;
    }
    match &m.p_wave {
        PWaveModel::Table { k_au, tan_delta, tan_max } => {
            check_table(k_au, tan_delta)?;
            if !(*tan_max > 0.0) {
                return Err("tan_max must be positive".into());
            }
        }
        PWaveModel::Resonance { tan_max, resonance_energy_au, .. } => {
            if !(*tan_max > 0.0) {
                return Err("tan_max must be positive".into());
            }
            if !(*resonance_energy_au > 0.0) {
                return Err("resonance_energy_au must be positive".into());
            }
        }
    }
    Ok(())
}

/// Linear interpolation; beyond the table the end segments are extended.
fn interp(k: f64, ks: &[f64], ts: &[f64]) -> f64 {
    let i = match ks.iter().position(|&x| x >= k) {
        Some(0) => 1,
        Some(i) => i,
        None => ks.len() - 1,
    };
    let (k0, k1) = (ks[i - 1], ks[i]);
    let w = (k - k0) / (k1 - k0);
    ts[i - 1] * (1.0 - w) + ts[i] * w
}

impl PhaseShiftModel {
    /// `(tan δ_s, tan δ_p)` at electron momentum `k` (atomic units).
    pub fn phase_shifts(&self, k: f64) -> Result<(f64, f64)> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::Domain(format!("phase shifts need k > 0, got {k}")));
        }
        let tan_s = match &self.s_wave {
            SWaveModel::EffectiveRange { scattering_length_au, polarizability_au } => {
                -scattering_length_au * k - PI * polarizability_au / 3.0 * k * k
            }
            SWaveModel::Table { k_au, tan_delta } => interp(k, k_au, tan_delta),
        };
        let (raw_p, tan_max) = match &self.p_wave {
            PWaveModel::Resonance { polarizability_au, resonance_energy_au, width_coefficient_au, tan_max } => {
                let background = PI * polarizability_au / 15.0 * k * k;
                let denom = resonance_energy_au - 0.5 * k * k;
                let pole = width_coefficient_au * k.powi(3);
                let resonant = if denom == 0.0 { f64::INFINITY.copysign(pole) } else { pole / denom };
                (background + resonant, *tan_max)
            }
            PWaveModel::Table { k_au, tan_delta, tan_max } => (interp(k, k_au, tan_delta), *tan_max),
        };
        Ok((tan_s, raw_p.clamp(-tan_max, tan_max)))
    }

    pub fn tan_max(&self) -> f64 {
        match &self.p_wave {
            PWaveModel::Resonance { tan_max, .. } | PWaveModel::Table { tan_max, .. } => *tan_max,
        }
    }

    /// Momentum of the p-wave pole, if the model has one.
    pub fn resonance_k(&self) -> Option<f64> {
        match &self.p_wave {
            PWaveModel::Resonance { resonance_energy_au, .. } => Some((2.0 * resonance_energy_au).sqrt()),
            PWaveModel::Table { .. } => None,
        }
    }

    pub fn content_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("phase-shift model serializes");
        hex::encode(Sha256::digest(&json))
    }
}
