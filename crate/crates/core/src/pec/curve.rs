use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{best_overlap, sorted_eigen, PecModel, Point};
use crate::exec::Exec;
use crate::units::hartree_to_mhz;
use crate::wavefunctions::GridSpec;
use crate::{Error, Result};

/// Adjacent-point overlaps closer than this are reported as ambiguous.
pub const TIE_THRESHOLD: f64 = 1e-3;

/// Points diagonalized concurrently before tracking advances; bounds memory
/// to a few eigenvector matrices.
const CHUNK: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchTie {
    pub point: usize,
    pub chosen: usize,
    pub other: usize,
    pub overlaps: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PecMeta {
    pub center: String,
    pub basis_description: String,
    pub basis_size: usize,
    pub basis_hash: String,
    pub species_hash: String,
    pub phase_shift_hash: String,
    pub grid: GridSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PecCurve {
    /// `(R, θ, φ)` in Bohr and radians.
    pub path: Vec<Point>,
    /// Sorted eigenvalues per point, 2π×MHz, relative to the unperturbed center level.
    pub eigenvalues: Vec<Vec<f64>>,
    pub tracked_branch: Vec<usize>,
    pub tracked_energy: Vec<f64>,
    /// `|⟨center|tracked⟩|²` along the path.
    pub center_overlap: Vec<f64>,
    pub ties: Vec<BranchTie>,
    pub meta: PecMeta,
}

impl PecCurve {
    /// Tracked energy at radius `r` by linear interpolation; refuses to leave the path.
    pub fn tracked_at(&self, r: f64) -> Result<f64> {
        let rs: Vec<f64> = self.path.iter().map(|p| p.0).collect();
        let (lo, hi) = (rs[0], *rs.last().expect("non-empty path"));
        if !(r >= lo && r <= hi) {
            return Err(Error::Extrapolation(format!("R = {r} outside computed path [{lo}, {hi}]")));
        }
        let i = rs.iter().position(|&x| x >= r).unwrap_or(rs.len() - 1).max(1);
        let w = if rs[i] == rs[i - 1] { 0.0 } else { (r - rs[i - 1]) / (rs[i] - rs[i - 1]) };
        Ok(self.tracked_energy[i - 1] * (1.0 - w) + self.tracked_energy[i] * w)
    }
}

/// Diagonalizes `H(R)` along `path` (ascending `R`) and follows the branch
/// that starts as the eigenvector closest to the center state, continuing by
/// maximal overlap between neighbouring points.
pub fn pec_curve(model: &PecModel, path: &[Point], exec: Exec) -> Result<PecCurve> {
    if path.is_empty() {
        return Err(Error::Validation("empty PEC path".into()));
    }
    if path.windows(2).any(|w| w[1].0 < w[0].0) {
        return Err(Error::Validation("PEC path must be sorted by R".into()));
    }
    let mut eigenvalues = Vec::with_capacity(path.len());
    let mut tracked_branch = Vec::with_capacity(path.len());
    let mut tracked_energy = Vec::with_capacity(path.len());
    let mut center_overlap = Vec::with_capacity(path.len());
    let mut ties = Vec::new();
    let center = model.center_vector();
    let mut reference: Vec<C64> = center.clone();

    for (c, chunk) in path.chunks(CHUNK).enumerate() {
        let solved: Vec<Result<_>> = exec.map(chunk, |_, p| model.hamiltonian(&[*p]).map(sorted_eigen));
        for (i, item) in solved.into_iter().enumerate() {
            let (vals, vecs) = item?;
            let index = c * CHUNK + i;
            let ((best, ov), (second, ov2)) = best_overlap(&vecs, &reference);
            if ov - ov2 < TIE_THRESHOLD {
                ties.push(BranchTie { point: index, chosen: best, other: second, overlaps: (ov, ov2) });
            }
            let column: Vec<C64> = vecs.column(best).iter().copied().collect();
            center_overlap.push(column[model.center_index].norm_sqr());
            tracked_branch.push(best);
            tracked_energy.push(hartree_to_mhz(vals[best]));
            eigenvalues.push(vals.iter().map(|&v| hartree_to_mhz(v)).collect());
            reference = column;
        }
    }

    Ok(PecCurve {
        path: path.to_vec(),
        eigenvalues,
        tracked_branch,
        tracked_energy,
        center_overlap,
        ties,
        meta: PecMeta {
            center: model.center.label(),
            basis_description: model.basis.description.clone(),
            basis_size: model.dim(),
            basis_hash: model.basis.content_hash(),
            species_hash: model.species_hash.clone(),
            phase_shift_hash: model.phase_shifts.content_hash(),
            grid: model.grid,
        },
    })
}
