use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Grid;

/// Discretization of the sup over centers and radii: dyadic radii
/// `r_min * 2^j <= r_max` and centers on a strided subgrid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylinderSamplingPlan {
    pub r_min: f64,
    pub r_max: f64,
    /// Center spacing in grid cells along each spatial axis.
    pub stride_x: usize,
    /// Center spacing in time slices.
    pub stride_t: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanSummary {
    pub radii: Vec<f64>,
    pub spatial_centers: usize,
    pub time_centers: usize,
    pub cylinders: usize,
}

impl CylinderSamplingPlan {
    /// Densest admissible plan for a grid: radii from `2h` to just under `L/4`,
    /// centers on every other point.
    pub fn default_for(grid: &Grid) -> CylinderSamplingPlan {
        let h = grid.h();
        CylinderSamplingPlan {
            r_min: 2.0 * h,
            r_max: 0.249 * grid.l,
            stride_x: 2,
            stride_t: 2,
        }
    }

    pub fn radii(&self) -> Vec<f64> {
        let mut r = self.r_min;
        let mut out = Vec::new();
        while r <= self.r_max * (1.0 + 1e-12) {
            out.push(r);
            r *= 2.0;
        }
        out
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let h = grid.h();
        if self.stride_x == 0 || self.stride_t == 0 {
            return Err(Error::Plan("strides must be positive".into()));
        }
        if !(self.r_min.is_finite() && self.r_max.is_finite()) || self.r_min > self.r_max {
            return Err(Error::Plan(format!("radius range [{}, {}] is empty", self.r_min, self.r_max)));
        }
        if self.r_min < 2.0 * h * (1.0 - 1e-12) {
            return Err(Error::Plan(format!(
                "r_min = {} is below twice the grid spacing {}",
                self.r_min, h
            )));
        }
        let top = *self.radii().last().expect("nonempty radii");
        if top >= grid.l / 4.0 {
            return Err(Error::Plan(format!(
                "radius {top} would wrap the torus (needs r < L/4 = {})",
                grid.l / 4.0
            )));
        }
        // coverage: every point lies strictly inside a cylinder of the smallest radius
        let half_x = (self.stride_x / 2) as f64 * h;
        if 3f64.sqrt() * half_x >= self.r_min {
            return Err(Error::Plan(format!(
                "spatial stride {} leaves points uncovered at radius {}",
                self.stride_x, self.r_min
            )));
        }
        let half_t = (self.stride_t / 2) as f64 * grid.dt();
        if half_t >= self.r_min * self.r_min {
            return Err(Error::Plan(format!(
                "time stride {} leaves slices uncovered at radius {}",
                self.stride_t, self.r_min
            )));
        }
        Ok(())
    }

    /// Center coordinates along one spatial axis.
    pub fn spatial_axis(&self, grid: &Grid) -> Vec<usize> {
        (0..grid.nx).step_by(self.stride_x).collect()
    }

    /// Center slices; the last slice is always included.
    pub fn time_axis(&self, grid: &Grid) -> Vec<usize> {
        let mut v: Vec<usize> = (0..grid.nt).step_by(self.stride_t).collect();
        if *v.last().expect("nt >= 1") != grid.nt - 1 {
            v.push(grid.nt - 1);
        }
        v
    }

    pub fn summary(&self, grid: &Grid) -> PlanSummary {
        let s = self.spatial_axis(grid).len().pow(3);
        let t = self.time_axis(grid).len();
        let radii = self.radii();
        PlanSummary {
            cylinders: s * t * radii.len(),
            radii,
            spatial_centers: s,
            time_centers: t,
        }
    }

    /// The plan with every radius multiplied by `factor` (strides unchanged).
    pub fn rescaled(&self, factor: f64) -> CylinderSamplingPlan {
        CylinderSamplingPlan {
            r_min: self.r_min * factor,
            r_max: self.r_max * factor,
            ..*self
        }
    }

    /// Refinement: halves both strides (when possible) and adds one smaller radius
    /// class if the grid allows it. The refined family contains this one.
    pub fn refined(&self, grid: &Grid) -> CylinderSamplingPlan {
        let r_min = if self.r_min / 2.0 >= 2.0 * grid.h() * (1.0 - 1e-12) {
            self.r_min / 2.0
        } else {
            self.r_min
        };
        CylinderSamplingPlan {
            r_min,
            r_max: self.r_max,
            stride_x: halve(self.stride_x),
            stride_t: halve(self.stride_t),
        }
    }
}

/// Half of an even stride, else one, so the refined centers are a superset.
fn halve(s: usize) -> usize {
    if s % 2 == 0 {
        s / 2
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_plan_is_valid() {
        let g = Grid::default();
        let p = CylinderSamplingPlan::default_for(&g);
        p.validate(&g).unwrap();
        assert_eq!(p.radii().len(), 2);
        let s = p.summary(&g);
        assert_eq!(s.spatial_centers, 16 * 16 * 16);
        assert_eq!(s.time_centers, 65);
    }

    #[test]
    fn rejects_wrapping_and_tiny_radii() {
        let g = Grid::default();
        let mut p = CylinderSamplingPlan::default_for(&g);
        p.r_max = g.l / 4.0;
        p.r_min = g.l / 4.0;
        assert!(p.validate(&g).is_err());
        let mut p = CylinderSamplingPlan::default_for(&g);
        p.r_min = g.h();
        assert!(p.validate(&g).is_err());
        let mut p = CylinderSamplingPlan::default_for(&g);
        p.stride_x = 8;
        assert!(p.validate(&g).is_err());
    }
}
