//! Batched evaluation of several sources that share per-slice inputs: sources
//! are built in parallel over a batch of slices, pushed through Duhamel
//! steppers in time order, then post-processed in parallel.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Grid, SpaceTimeField, SpectralContext, SpectralSnapshot};

use super::duhamel::DuhamelStepper;

/// Output of a pass: one field per source and the largest mean removed by
/// any inverse Laplacian in the post-processing.
pub struct PassOutput {
    pub fields: Vec<SpaceTimeField>,
    pub mean_removed: f64,
}

fn batch_len() -> usize {
    (2 * rayon::current_num_threads()).max(4)
}

/// Runs `count` sources through an optional Duhamel integral.
///
/// `sources(n)` returns the `count` source slices at slice `n`.
/// `post(term, n, d)` turns the integrated slice into real samples with
/// `out_comps` components and reports the mean it removed.
pub fn run_pass<S, P>(
    grid: &Grid,
    count: usize,
    out_comps: usize,
    diffusivity: Option<f64>,
    sources: S,
    post: P,
) -> Result<PassOutput>
where
    S: Fn(usize) -> Result<Vec<SpectralSnapshot>> + Sync,
    P: Fn(usize, usize, SpectralSnapshot) -> Result<(Vec<f64>, f64)> + Sync,
{
    let ctx = SpectralContext::get(grid.nx, grid.l);
    let mut steppers = match diffusivity {
        Some(kappa) => Some(
            (0..count)
                .map(|_| DuhamelStepper::new(&ctx, grid.dt(), kappa))
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };
    let mut fields: Vec<SpaceTimeField> = (0..count).map(|_| SpaceTimeField::zeros(*grid, out_comps)).collect();
    let mut mean_removed: f64 = 0.0;
    let batch = batch_len();
    let mut start = 0;
    while start < grid.nt {
        let end = (start + batch).min(grid.nt);
        let built: Vec<Vec<SpectralSnapshot>> = (start..end)
            .into_par_iter()
            .map(|n| {
                let s = sources(n)?;
                if s.len() != count {
                    return Err(Error::Shape(format!("expected {count} sources, got {}", s.len())));
                }
                Ok(s)
            })
            .collect::<Result<_>>()?;
        let mut integrated: Vec<(usize, usize, SpectralSnapshot)> = Vec::with_capacity((end - start) * count);
        for (offset, slice_sources) in built.into_iter().enumerate() {
            for (term, s) in slice_sources.into_iter().enumerate() {
                let d = match steppers.as_mut() {
                    Some(st) => st[term].push(s)?,
                    None => s,
                };
                integrated.push((term, start + offset, d));
            }
        }
        let processed: Vec<(usize, usize, Vec<f64>, f64)> = integrated
            .into_par_iter()
            .map(|(term, n, d)| {
                let (vals, mean) = post(term, n, d)?;
                Ok((term, n, vals, mean))
            })
            .collect::<Result<_>>()?;
        for (term, n, vals, mean) in processed {
            if vals.len() != fields[term].slice_len() {
                return Err(Error::Shape(format!("post-processing returned {} values", vals.len())));
            }
            fields[term].set_slice(n, &vals);
            mean_removed = mean_removed.max(mean);
        }
        start = end;
    }
    for f in &fields {
        if let Some(i) = f.values().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
    }
    Ok(PassOutput { fields, mean_removed })
}

/// Inverse Laplacian of real samples, mean-projected; returns the samples and
/// the largest removed mean.
pub fn inverse_laplacian_real(ctx: &std::sync::Arc<SpectralContext>, comps: usize, real: &[f64]) -> Result<(Vec<f64>, f64)> {
    let (inv, means) = SpectralSnapshot::from_real(ctx, comps, real).inverse_laplacian(true)?;
    Ok((inv.to_real(), means.iter().fold(0.0, |m, v| m.max(v.abs()))))
}
