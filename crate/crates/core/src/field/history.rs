use std::borrow::Cow;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use super::spectral::{SpectralContext, SpectralSnapshot};
use crate::error::{Error, Result};

/// Sampled scalar or vector field on a space-time grid.
///
/// Storage is slice-major: for each time slice the components follow one
/// another, each an `Nx^3` block with x fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField {
    grid: Grid,
    components: usize,
    values: Vec<f64>,
}

/// Read access to a time series of slices. Lets frozen or analytic inputs
/// stand in for a stored history without materializing every slice.
pub trait FieldHistory: Sync {
    fn grid(&self) -> &Grid;
    fn components(&self) -> usize;
    fn slice(&self, n: usize) -> Cow<'_, [f64]>;

    fn spectral_slice(&self, n: usize) -> SpectralSnapshot {
        let g = self.grid();
        SpectralSnapshot::from_real(&SpectralContext::get(g.nx, g.l), self.components(), &self.slice(n))
    }
}

impl SpaceTimeField {
    pub fn zeros(grid: Grid, components: usize) -> SpaceTimeField {
        SpaceTimeField {
            grid,
            components,
            values: vec![0.0; grid.nt * components * grid.points()],
        }
    }

    pub fn from_values(grid: Grid, components: usize, values: Vec<f64>) -> Result<SpaceTimeField> {
        grid.validate()?;
        if components != 1 && components != 3 && components != 6 {
            return Err(Error::Shape(format!("unsupported component count {components}")));
        }
        let want = grid.nt * components * grid.points();
        if values.len() != want {
            return Err(Error::Shape(format!("expected {want} values, got {}", values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(SpaceTimeField {
            grid,
            components,
            values,
        })
    }

    /// Samples `f(t, x)` at every grid event.
    pub fn from_fn<F>(grid: Grid, components: usize, f: F) -> SpaceTimeField
    where
        F: Fn(f64, [f64; 3]) -> [f64; 3] + Sync,
    {
        let p = grid.points();
        let mut values = vec![0.0; grid.nt * components * p];
        values
            .par_chunks_mut(components * p)
            .enumerate()
            .for_each(|(n, slice)| {
                let t = grid.time(n);
                for i in 0..p {
                    let v = f(t, grid.position(i));
                    for c in 0..components {
                        slice[c * p + i] = v[c];
                    }
                }
            });
        SpaceTimeField {
            grid,
            components,
            values,
        }
    }

    /// Builds a field slice by slice from a generator.
    pub fn from_slices<F>(grid: Grid, components: usize, f: F) -> SpaceTimeField
    where
        F: Fn(usize) -> Vec<f64> + Sync,
    {
        let len = components * grid.points();
        let mut values = vec![0.0; grid.nt * len];
        values.par_chunks_mut(len).enumerate().for_each(|(n, out)| {
            let s = f(n);
            out.copy_from_slice(&s);
        });
        SpaceTimeField {
            grid,
            components,
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn slice_len(&self) -> usize {
        self.components * self.grid.points()
    }

    pub fn slice(&self, n: usize) -> &[f64] {
        let len = self.slice_len();
        &self.values[n * len..(n + 1) * len]
    }

    pub fn slice_mut(&mut self, n: usize) -> &mut [f64] {
        let len = self.slice_len();
        &mut self.values[n * len..(n + 1) * len]
    }

    pub fn set_slice(&mut self, n: usize, data: &[f64]) {
        self.slice_mut(n).copy_from_slice(data);
    }

    /// Value of component `c` at slice `n`, spatial flat index `i`.
    #[inline]
    pub fn at(&self, n: usize, c: usize, i: usize) -> f64 {
        let p = self.grid.points();
        self.values[(n * self.components + c) * p + i]
    }

    /// Pointwise Euclidean magnitude as a one-component field.
    pub fn magnitude(&self) -> SpaceTimeField {
        if self.components == 1 {
            let mut out = self.clone();
            out.values.iter_mut().for_each(|v| *v = v.abs());
            return out;
        }
        let p = self.grid.points();
        let c = self.components;
        let mut values = vec![0.0; self.grid.nt * p];
        values.par_chunks_mut(p).enumerate().for_each(|(n, out)| {
            let s = self.slice(n);
            for i in 0..p {
                out[i] = (0..c).map(|k| s[k * p + i] * s[k * p + i]).sum::<f64>().sqrt();
            }
        });
        SpaceTimeField {
            grid: self.grid,
            components: 1,
            values,
        }
    }

    /// Components `[from, from + count)` as a new field.
    pub fn select(&self, from: usize, count: usize) -> Result<SpaceTimeField> {
        if from + count > self.components {
            return Err(Error::Shape(format!(
                "components {from}..{} out of range for {}",
                from + count,
                self.components
            )));
        }
        let p = self.grid.points();
        Ok(SpaceTimeField::from_slices(self.grid, count, |n| {
            self.slice(n)[from * p..(from + count) * p].to_vec()
        }))
    }

    /// Concatenate components of two fields on the same grid.
    pub fn concat(a: &SpaceTimeField, b: &SpaceTimeField) -> Result<SpaceTimeField> {
        if a.grid != b.grid {
            return Err(Error::Shape("grids differ".into()));
        }
        let comps = a.components + b.components;
        SpaceTimeField::from_values(
            a.grid,
            comps,
            (0..a.grid.nt)
                .flat_map(|n| a.slice(n).iter().chain(b.slice(n)).copied().collect::<Vec<_>>())
                .collect(),
        )
    }

    pub fn scale(&mut self, a: f64) {
        self.values.iter_mut().for_each(|v| *v *= a);
    }

    pub fn scaled(&self, a: f64) -> SpaceTimeField {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn add_scaled(&mut self, other: &SpaceTimeField, a: f64) -> Result<()> {
        self.check_same(other)?;
        self.values
            .par_iter_mut()
            .zip(other.values.par_iter())
            .for_each(|(x, y)| *x += a * y);
        Ok(())
    }

    pub fn check_same(&self, other: &SpaceTimeField) -> Result<()> {
        if self.grid != other.grid || self.components != other.components {
            return Err(Error::Shape(format!(
                "fields differ: {} comps on {:?} vs {} comps on {:?}",
                self.components, self.grid, other.components, other.grid
            )));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.par_iter().map(|v| v.abs()).reduce(|| 0.0, f64::max)
    }

    /// Largest pointwise magnitude difference.
    pub fn max_abs_diff(&self, other: &SpaceTimeField) -> Result<f64> {
        self.check_same(other)?;
        Ok(self
            .values
            .par_iter()
            .zip(other.values.par_iter())
            .map(|(a, b)| (a - b).abs())
            .reduce(|| 0.0, f64::max))
    }

    /// Root mean square over all events and components.
    pub fn rms(&self) -> f64 {
        let s: f64 = self
            .values
            .par_chunks(self.slice_len())
            .map(|c| c.iter().map(|v| v * v).sum::<f64>())
            .collect::<Vec<_>>()
            .iter()
            .sum();
        (s / self.values.len() as f64).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Multiply pointwise by a scalar field on the same grid.
    pub fn multiply_scalar(&self, s: &SpaceTimeField) -> Result<SpaceTimeField> {
        if s.components != 1 || s.grid != self.grid {
            return Err(Error::Shape("multiplier must be a scalar field on the same grid".into()));
        }
        let p = self.grid.points();
        let c = self.components;
        Ok(SpaceTimeField::from_slices(self.grid, c, |n| {
            let a = self.slice(n);
            let m = s.slice(n);
            let mut out = a.to_vec();
            for k in 0..c {
                for i in 0..p {
                    out[k * p + i] *= m[i];
                }
            }
            out
        }))
    }

    /// Pointwise product: dot product for two vectors, broadcast otherwise.
    pub fn pointwise_product(&self, other: &SpaceTimeField) -> Result<SpaceTimeField> {
        if self.grid != other.grid {
            return Err(Error::Shape("grids differ".into()));
        }
        match (self.components, other.components) {
            (1, _) => other.multiply_scalar(self),
            (_, 1) => self.multiply_scalar(other),
            (a, b) if a == b => {
                let p = self.grid.points();
                Ok(SpaceTimeField::from_slices(self.grid, 1, |n| {
                    let x = self.slice(n);
                    let y = other.slice(n);
                    (0..p).map(|i| (0..a).map(|k| x[k * p + i] * y[k * p + i]).sum()).collect()
                }))
            }
            (a, b) => Err(Error::Shape(format!("cannot multiply {a} and {b} components"))),
        }
    }

    /// Sum of all samples times the cell measure.
    pub fn integral_of_power(&self, p: f64) -> f64 {
        let m = self.magnitude();
        let sums: Vec<f64> = m
            .values
            .par_chunks(self.grid.points())
            .map(|c| c.iter().map(|v| v.powf(p)).sum::<f64>())
            .collect();
        sums.iter().sum::<f64>() * self.grid.cell_measure()
    }

    /// All slices transformed, one snapshot per slice.
    pub fn spectral_slices(&self) -> Vec<SpectralSnapshot> {
        (0..self.grid.nt)
            .into_par_iter()
            .map(|n| FieldHistory::spectral_slice(self, n))
            .collect()
    }

    /// Assemble a field from per-slice snapshots.
    pub fn from_spectral(grid: Grid, slices: &[SpectralSnapshot]) -> SpaceTimeField {
        let comps = slices[0].comps();
        SpaceTimeField::from_slices(grid, comps, |n| slices[n].to_real())
    }
}

impl FieldHistory for SpaceTimeField {
    fn grid(&self) -> &Grid {
        &self.grid
    }
    fn components(&self) -> usize {
        self.components
    }
    fn slice(&self, n: usize) -> Cow<'_, [f64]> {
        Cow::Borrowed(SpaceTimeField::slice(self, n))
    }
}

/// A time-independent field broadcast over every slice.
#[derive(Clone, Debug)]
pub struct FrozenField {
    grid: Grid,
    components: usize,
    values: Arc<Vec<f64>>,
}

impl FrozenField {
    pub fn new(grid: Grid, components: usize, values: Vec<f64>) -> FrozenField {
        assert_eq!(values.len(), components * grid.points());
        FrozenField {
            grid,
            components,
            values: Arc::new(values),
        }
    }

    pub fn zeros(grid: Grid, components: usize) -> FrozenField {
        FrozenField::new(grid, components, vec![0.0; components * grid.points()])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

impl FieldHistory for FrozenField {
    fn grid(&self) -> &Grid {
        &self.grid
    }
    fn components(&self) -> usize {
        self.components
    }
    fn slice(&self, _n: usize) -> Cow<'_, [f64]> {
        Cow::Borrowed(&self.values)
    }
}

/// Serializable description of where a field came from, for reports.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FieldSummary {
    pub components: usize,
    pub max_abs: f64,
    pub rms: f64,
}

impl SpaceTimeField {
    pub fn summary(&self) -> FieldSummary {
        FieldSummary {
            components: self.components,
            max_abs: self.max_abs(),
            rms: self.rms(),
        }
    }
}
