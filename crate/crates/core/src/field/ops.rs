//! Slice-wise spectral operators on whole space-time fields.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::history::{FieldHistory, SpaceTimeField};
use super::spectral::SpectralSnapshot;
use crate::error::{Error, Result};

fn map_slices<F>(v: &SpaceTimeField, out_comps: usize, f: F) -> Result<SpaceTimeField>
where
    F: Fn(&SpectralSnapshot) -> Result<SpectralSnapshot> + Sync,
{
    let g = *v.grid();
    let slices: Result<Vec<Vec<f64>>> = (0..g.nt)
        .into_par_iter()
        .map(|n| Ok(f(&v.spectral_slice(n))?.to_real()))
        .collect();
    let slices = slices?;
    Ok(SpaceTimeField::from_slices(g, out_comps, |n| slices[n].clone()))
}

fn need(v: &SpaceTimeField, comps: usize, op: &str) -> Result<()> {
    if v.components() != comps {
        return Err(Error::Shape(format!(
            "{op} needs a {comps}-component field, got {}",
            v.components()
        )));
    }
    Ok(())
}

pub fn curl(v: &SpaceTimeField) -> Result<SpaceTimeField> {
    need(v, 3, "curl")?;
    map_slices(v, 3, |s| s.curl())
}

pub fn divergence(v: &SpaceTimeField) -> Result<SpaceTimeField> {
    need(v, 3, "divergence")?;
    map_slices(v, 1, |s| s.divergence())
}

pub fn gradient(s: &SpaceTimeField) -> Result<SpaceTimeField> {
    need(s, 1, "gradient")?;
    map_slices(s, 3, |x| x.gradient())
}

pub fn laplacian(v: &SpaceTimeField) -> Result<SpaceTimeField> {
    map_slices(v, v.components(), |s| Ok(s.laplacian()))
}

pub fn leray_project(v: &SpaceTimeField) -> Result<SpaceTimeField> {
    need(v, 3, "leray_project")?;
    map_slices(v, 3, |s| s.leray_project())
}

/// Means subtracted by an inverse Laplacian, per slice and component.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct MeanReport {
    pub max_abs_removed: f64,
    pub removed: Vec<Vec<f64>>,
}

impl MeanReport {
    pub fn merge(&mut self, other: &MeanReport) {
        self.max_abs_removed = self.max_abs_removed.max(other.max_abs_removed);
    }
}

pub fn inverse_laplacian(s: &SpaceTimeField, project_mean: bool) -> Result<(SpaceTimeField, MeanReport)> {
    let g = *s.grid();
    let results: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..g.nt)
        .into_par_iter()
        .map(|n| {
            let (inv, means) = s.spectral_slice(n).inverse_laplacian(project_mean).map_err(|e| match e {
                Error::MeanMode { mean, .. } => Error::MeanMode { slice: n, mean },
                other => other,
            })?;
            Ok((inv.to_real(), means))
        })
        .collect();
    let mut slices = Vec::with_capacity(g.nt);
    let mut report = MeanReport::default();
    for r in results {
        let (vals, means) = r?;
        report.max_abs_removed = means.iter().fold(report.max_abs_removed, |m, v| m.max(v.abs()));
        report.removed.push(means);
        slices.push(vals);
    }
    Ok((SpaceTimeField::from_slices(g, s.components(), |n| slices[n].clone()), report))
}

/// Largest spectral divergence over all slices.
pub fn max_divergence(v: &SpaceTimeField) -> Result<f64> {
    need(v, 3, "divergence")?;
    let g = *v.grid();
    let vals: Result<Vec<f64>> = (0..g.nt)
        .into_par_iter()
        .map(|n| v.spectral_slice(n).max_divergence())
        .collect();
    Ok(vals?.into_iter().fold(0.0, f64::max))
}

/// Checks the divergence-free tag: max divergence at most `1e-10` times RMS.
pub fn is_divergence_free(v: &SpaceTimeField) -> Result<bool> {
    let d = max_divergence(v)?;
    Ok(d <= 1e-10 * v.rms() || d < 1e-13)
}
