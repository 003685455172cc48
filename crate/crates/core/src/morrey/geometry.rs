use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Grid;
use crate::scalar::{quasi_distance_from_gap, torus_gap};

/// A space-time event `(t, x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub x: [f64; 3],
}

/// `|t - s|^{1/2} + |x - y|` with the minimal image on a torus of side `l`.
/// Pass `f64::INFINITY` for `l` to get the plain Euclidean distance.
pub fn quasi_distance(a: &Event, b: &Event, l: f64) -> f64 {
    let gap = |i: usize| {
        let d = a.x[i] - b.x[i];
        if l.is_finite() {
            torus_gap(d, l)
        } else {
            d
        }
    };
    quasi_distance_from_gap(a.t - b.t, [gap(0), gap(1), gap(2)])
}

/// `]t0 - r^2, t0 + r^2[ x B(x0, r)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParabolicCylinder {
    pub t0: f64,
    pub x0: [f64; 3],
    pub r: f64,
}

impl ParabolicCylinder {
    pub fn new(t0: f64, x0: [f64; 3], r: f64) -> Result<ParabolicCylinder> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Geometry(format!("radius {r} must be positive")));
        }
        Ok(ParabolicCylinder { t0, x0, r })
    }

    pub fn to_cylinder(&self) -> Cylinder {
        Cylinder {
            t_start: self.t0 - self.r * self.r,
            t_end: self.t0 + self.r * self.r,
            center: self.x0,
            radius: self.r,
        }
    }

    /// Continuum measure `2 r^2 * (4 pi / 3) r^3`.
    pub fn measure(&self) -> f64 {
        8.0 * std::f64::consts::PI / 3.0 * self.r.powi(5)
    }
}

/// Open time interval times a ball: `]t_start, t_end[ x B(center, radius)`.
/// Parabolic cylinders are the special case `t_end - t_start = 2 r^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cylinder {
    pub t_start: f64,
    pub t_end: f64,
    pub center: [f64; 3],
    pub radius: f64,
}

impl Cylinder {
    pub fn new(t_start: f64, t_end: f64, center: [f64; 3], radius: f64) -> Result<Cylinder> {
        let c = Cylinder {
            t_start,
            t_end,
            center,
            radius,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Geometry(format!("radius {} must be positive", self.radius)));
        }
        if !(self.t_end > self.t_start) {
            return Err(Error::Geometry(format!(
                "empty time interval ]{}, {}[",
                self.t_start, self.t_end
            )));
        }
        Ok(())
    }

    /// Spatial distance from the axis using the torus minimal image.
    pub fn axis_distance(&self, x: [f64; 3], l: f64) -> f64 {
        let g: Vec<f64> = (0..3).map(|i| torus_gap(x[i] - self.center[i], l)).collect();
        (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt()
    }

    pub fn contains(&self, t: f64, x: [f64; 3], l: f64) -> bool {
        t > self.t_start && t < self.t_end && self.axis_distance(x, l) < self.radius
    }

    /// Strict containment of `inner` with positive margins in time and space.
    pub fn strictly_contains(&self, inner: &Cylinder, l: f64) -> bool {
        let offset = inner.axis_distance(self.center, l);
        inner.t_start > self.t_start
            && inner.t_end < self.t_end
            && offset + inner.radius < self.radius
    }

    pub fn measure(&self) -> f64 {
        (self.t_end - self.t_start) * 4.0 / 3.0 * std::f64::consts::PI * self.radius.powi(3)
    }

    /// Indicator sampled on a grid: one where the cell center lies inside.
    pub fn indicator(&self, grid: &Grid) -> crate::field::SpaceTimeField {
        let c = *self;
        let l = grid.l;
        crate::field::SpaceTimeField::from_fn(*grid, 1, move |t, x| {
            [if c.contains(t, x, l) { 1.0 } else { 0.0 }, 0.0, 0.0]
        })
    }

    /// Checks the padding contract: the box is at least four diameters wide.
    pub fn check_padding(&self, grid: &Grid) -> Result<()> {
        if 8.0 * self.radius > grid.l + 1e-12 {
            return Err(Error::Geometry(format!(
                "radius {} violates the padding contract L >= 4 * diameter (L = {})",
                self.radius, grid.l
            )));
        }
        Ok(())
    }

    /// Checks that the cylinder lies inside the recorded time span.
    pub fn check_within_history(&self, grid: &Grid) -> Result<()> {
        if self.t_start < 0.0 || self.t_end > grid.t + 1e-12 {
            return Err(Error::Geometry(format!(
                "time interval ]{}, {}[ leaves the history [0, {}]",
                self.t_start, self.t_end, grid.t
            )));
        }
        Ok(())
    }
}
