//! Plaquette configurations and logical-qubit encodings.
//!
//! Four-qubit code: `|0_L⟩ = (|0000⟩ + |1111⟩)/√2`, `|1_L⟩ = (|0101⟩ + |1010⟩)/√2`.
//! Six-qubit code: only sites 2, 4, 6 overlap the Rydberg orbital; the
//! logical states are the parity sectors of `S_p` (number of those sites in
//! `|0⟩`), odd `S_p` being `|1_L⟩`. Sites 1, 3, 5 are spectators held in `|0⟩`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    FourQubit,
    SixQubit,
}

impl Encoding {
    pub fn sites(self) -> usize {
        match self {
            Encoding::FourQubit => 4,
            Encoding::SixQubit => 6,
        }
    }

    /// Every configuration the gate distinguishes, in a fixed order.
    pub fn configurations(self) -> Vec<PlaquetteConfig> {
        match self {
            Encoding::FourQubit => (0..16).map(|b| PlaquetteConfig { encoding: self, bits: b }).collect(),
            Encoding::SixQubit => (0..8u8)
                .map(|t| {
                    // t enumerates sites (2, 4, 6); bit 5 is site 1.
                    let bits = ((t >> 2) & 1) << 4 | ((t >> 1) & 1) << 2 | (t & 1);
                    PlaquetteConfig { encoding: self, bits }
                })
                .collect(),
        }
    }
}

/// Computational basis state of the plaquette; bit `sites−k` holds site `k`
/// (sites numbered from 1), so `|0101⟩` reads left to right.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlaquetteConfig {
    pub encoding: Encoding,
    pub bits: u8,
}

impl PlaquetteConfig {
    pub fn parse(encoding: Encoding, label: &str) -> Result<PlaquetteConfig> {
        let s = label.trim().trim_start_matches('|').trim_end_matches('⟩').trim_end_matches('>');
        if s.len() != encoding.sites() || !s.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::Validation(format!("{label:?} is not a {}-site configuration", encoding.sites())));
        }
        Ok(PlaquetteConfig { encoding, bits: u8::from_str_radix(s, 2).expect("checked binary") })
    }

    pub fn site(&self, k: usize) -> u8 {
        (self.bits >> (self.encoding.sites() - k)) & 1
    }

    /// Sites that overlap the Rydberg orbital.
    pub fn targeted_sites(&self) -> Vec<usize> {
        match self.encoding {
            Encoding::FourQubit => vec![1, 2, 3, 4],
            Encoding::SixQubit => vec![2, 4, 6],
        }
    }

    /// Plaquette spin: targeted sites in `|0⟩`.
    pub fn plaquette_spin(&self) -> u32 {
        self.targeted_sites().into_iter().filter(|&k| self.site(k) == 0).count() as u32
    }

    pub fn label(&self) -> String {
        format!("|{:0width$b}⟩", self.bits, width = self.encoding.sites())
    }
}

/// Normalized superposition over plaquette configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicalState {
    pub encoding: Encoding,
    pub amplitudes: Vec<(PlaquetteConfig, C64)>,
}

fn basis_members(encoding: Encoding, logical: u8) -> Vec<PlaquetteConfig> {
    match encoding {
        Encoding::FourQubit => {
            let labels = if logical == 0 { ["0000", "1111"] } else { ["0101", "1010"] };
            labels.iter().map(|l| PlaquetteConfig::parse(encoding, l).expect("valid label")).collect()
        }
        Encoding::SixQubit => encoding
            .configurations()
            .into_iter()
            .filter(|c| c.plaquette_spin() % 2 == u32::from(logical))
            .collect(),
    }
}

impl LogicalState {
    pub fn new(encoding: Encoding, amplitudes: Vec<(PlaquetteConfig, C64)>) -> Result<LogicalState> {
        let norm: f64 = amplitudes.iter().map(|(_, a)| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "amplitudes have squared norm {norm:.12} (defect {:+.3e}); they must be normalized",
                norm - 1.0
            )));
        }
        if amplitudes.iter().any(|(c, _)| c.encoding != encoding) {
            return Err(Error::Validation("configuration encoding mismatch".into()));
        }
        Ok(LogicalState { encoding, amplitudes })
    }

    /// `a₀|0_L⟩ + a₁|1_L⟩`.
    pub fn logical(encoding: Encoding, a0: C64, a1: C64) -> Result<LogicalState> {
        let mut amps = Vec::new();
        for (k, a) in [(0u8, a0), (1u8, a1)] {
            let members = basis_members(encoding, k);
            let w = 1.0 / (members.len() as f64).sqrt();
            for c in members {
                if a != C64::default() {
                    amps.push((c, a * w));
                }
            }
        }
        LogicalState::new(encoding, amps)
    }

    pub fn zero(encoding: Encoding) -> LogicalState {
        LogicalState::logical(encoding, C64::new(1.0, 0.0), C64::default()).expect("normalized")
    }

    pub fn one(encoding: Encoding) -> LogicalState {
        LogicalState::logical(encoding, C64::default(), C64::new(1.0, 0.0)).expect("normalized")
    }

    pub fn plus(encoding: Encoding) -> LogicalState {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        LogicalState::logical(encoding, h, h).expect("normalized")
    }
}

/// Row `k` holds `⟨k_L|c⟩` over `configs`.
pub fn logical_projector(encoding: Encoding, configs: &[PlaquetteConfig]) -> [Vec<f64>; 2] {
    let row = |k: u8| {
        let members = basis_members(encoding, k);
        let w = 1.0 / (members.len() as f64).sqrt();
        configs.iter().map(|c| if members.contains(c) { w } else { 0.0 }).collect()
    };
    [row(0), row(1)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_qubit_spins() {
        let sp = |l: &str| PlaquetteConfig::parse(Encoding::FourQubit, l).unwrap().plaquette_spin();
        assert_eq!((sp("0000"), sp("1111"), sp("0101"), sp("1010")), (4, 0, 2, 2));
        assert!(PlaquetteConfig::parse(Encoding::FourQubit, "012").is_err());
    }

    #[test]
    fn six_qubit_sectors() {
        let configs = Encoding::SixQubit.configurations();
        assert_eq!(configs.len(), 8);
        for c in &configs {
            assert_eq!(c.site(1) + c.site(3) + c.site(5), 0);
        }
        let odd = configs.iter().filter(|c| c.plaquette_spin() % 2 == 1).count();
        assert_eq!(odd, 4);
        let one = LogicalState::one(Encoding::SixQubit);
        assert!(one.amplitudes.iter().all(|(c, _)| c.plaquette_spin() % 2 == 1));
    }

    #[test]
    fn logical_states_normalized_and_checked() {
        let p = LogicalState::plus(Encoding::FourQubit);
        assert_eq!(p.amplitudes.len(), 4);
        let err = LogicalState::logical(Encoding::FourQubit, C64::new(1.0, 0.0), C64::new(0.5, 0.0)).unwrap_err();
        assert!(err.to_string().contains("1.25"), "{err}");
    }

    #[test]
    fn projector_rows_orthonormal() {
        for enc in [Encoding::FourQubit, Encoding::SixQubit] {
            let configs = enc.configurations();
            let [a, b] = logical_projector(enc, &configs);
            let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
            assert!((dot(&a, &a) - 1.0).abs() < 1e-15 && (dot(&b, &b) - 1.0).abs() < 1e-15 && dot(&a, &b) == 0.0);
        }
    }
}
