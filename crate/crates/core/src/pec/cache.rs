//! On-disk PEC cache and CSV export.
//!
//! Entries are JSON files named by a SHA-256 key over everything that
//! determines the curve. Writes go to a temporary file in the cache directory
//! and are renamed into place, so concurrent writers never expose a partial
//! file and the last completed write wins.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{PecCurve, PecModel, Point};
use crate::units::bohr_to_nm;
use crate::{Error, Result};

#[derive(Serialize)]
struct KeyMaterial<'a> {
    format: u32,
    species: &'a str,
    basis: &'a str,
    phase_shifts: &'a str,
    grid: &'a crate::wavefunctions::GridSpec,
    center: String,
    path: &'a [Point],
}

pub fn cache_key(model: &PecModel, path: &[Point]) -> String {
    let basis = model.basis.content_hash();
    let phase = model.phase_shifts.content_hash();
    let material = KeyMaterial {
        format: 1,
        species: &model.species_hash,
        basis: &basis,
        phase_shifts: &phase,
        grid: &model.grid,
        center: model.center.label(),
        path,
    };
    hex::encode(Sha256::digest(serde_json::to_vec(&material).expect("key serializes")))
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    curve: PecCurve,
}

#[derive(Clone, Debug)]
pub struct PecCache {
    dir: PathBuf,
}

impl PecCache {
    pub fn new(dir: impl Into<PathBuf>) -> PecCache {
        PecCache { dir: dir.into() }
    }

    fn file(&self, key: &str) -> PathBuf {
        self.dir.join(format!("pec-{key}.json"))
    }

    /// `None` on a miss, including unreadable or mismatched entries.
    pub fn load(&self, key: &str) -> Option<PecCurve> {
        let text = std::fs::read(self.file(key)).ok()?;
        let entry: Entry = serde_json::from_slice(&text).ok()?;
        (entry.key == key).then_some(entry.curve)
    }

    pub fn store(&self, key: &str, curve: &PecCurve) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let target = self.file(key);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let body = serde_json::to_vec(&Entry { key: key.to_string(), curve: curve.clone() }).expect("curve serializes");
        tmp.write_all(&body).map_err(|e| Error::io(tmp.path(), e))?;
        tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
        tmp.persist(&target).map_err(|e| Error::io(&target, e.error))?;
        Ok(target)
    }
}

/// One row per (point, branch): `R_nm,theta_rad,branch_index,energy_2pi_MHz`.
pub fn write_curve_csv(curve: &PecCurve, path: &Path) -> Result<()> {
    let mut out = String::from("R_nm,theta_rad,branch_index,energy_2pi_MHz\n");
    for (p, vals) in curve.path.iter().zip(&curve.eigenvalues) {
        for (b, e) in vals.iter().enumerate() {
            out.push_str(&format!("{},{},{},{}\n", bohr_to_nm(p.0), p.1, b, e));
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// JSON sidecar with hashes, basis size, the tracked branch and any extras.
pub fn write_metadata(curve: &PecCurve, extra: serde_json::Value, path: &Path) -> Result<()> {
    let tracked: Vec<serde_json::Value> = curve
        .path
        .iter()
        .zip(curve.tracked_branch.iter().zip(&curve.tracked_energy))
        .map(|(p, (b, e))| serde_json::json!({ "R_nm": bohr_to_nm(p.0), "theta_rad": p.1, "branch_index": b, "energy_2pi_MHz": e }))
        .collect();
    let doc = serde_json::json!({
        "meta": curve.meta,
        "ties": curve.ties,
        "tracked": tracked,
        "extra": extra,
    });
    let text = serde_json::to_string_pretty(&doc).expect("metadata serializes");
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atomic::SpeciesData;
    use crate::exec::Exec;
    use crate::pec::{build_basis, pec_curve, BasisSpec, ManifoldSpec};
    use crate::wavefunctions::{GridSpec, RydbergState};
    use crate::Half;

    fn model(species: &SpeciesData) -> PecModel {
        let c = RydbergState::new(45, 2, Half(5), Half(5)).unwrap();
        let spec = BasisSpec { manifolds: vec![ManifoldSpec::Level { n: 45, l: 2, j: Half(5) }], m_max: 2.5 };
        PecModel::new(species, c, build_basis(&c, &spec).unwrap(), GridSpec::default(), Exec::Sequential).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact_and_keys_track_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let cache = PecCache::new(dir.path());
        let cs = SpeciesData::bundled("cs133").unwrap();
        let m = model(&cs);
        let path: Vec<Point> = (0..4).map(|i| (2500.0 + 300.0 * i as f64, 1.3, 0.2)).collect();
        let curve = pec_curve(&m, &path, Exec::Sequential).unwrap();
        let key = cache_key(&m, &path);
        assert!(cache.load(&key).is_none());
        cache.store(&key, &curve).unwrap();
        assert_eq!(cache.load(&key).unwrap(), curve);

        let mut other = cs.clone();
        if let crate::atomic::SWaveModel::EffectiveRange { scattering_length_au, .. } = &mut other.phase_shifts.s_wave {
            *scattering_length_au += 0.1;
        }
        assert_ne!(cache_key(&model(&other), &path), key);
    }

    #[test]
    fn mismatched_entry_is_a_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = PecCache::new(dir.path());
        let cs = SpeciesData::bundled("cs133").unwrap();
        let m = model(&cs);
        let path = vec![(3000.0, 1.3, 0.2)];
        let curve = pec_curve(&m, &path, Exec::Sequential).unwrap();
        let stored = cache.store("abc", &curve).unwrap();
        std::fs::rename(&stored, dir.path().join("pec-def.json")).unwrap();
        assert!(cache.load("def").is_none());
    }
}
