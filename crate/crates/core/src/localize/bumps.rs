//! Nested pairs of cutoffs: a big one equal to one on the support of a small one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Grid, SpaceTimeField};
use crate::morrey::Cylinder;

use super::cutoff::{Cutoff, CutoffSampler};

/// Three nested cylinders `outer ⊃ mid ⊃ inner`, all avoiding `t = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NestedCylinders {
    pub outer: Cylinder,
    pub mid: Cylinder,
    pub inner: Cylinder,
}

/// `big = 1` on `mid`, supported in `outer`; `small = 1` on `inner`,
/// supported in `mid`. Hence `big * small = small` exactly.
#[derive(Clone, Debug)]
pub struct BumpFamily {
    pub cylinders: NestedCylinders,
    pub big: Cutoff,
    pub small: Cutoff,
}

pub const DEFAULT_ORDER: u32 = 3;

fn centered(l: f64, t_start: f64, t_end: f64, radius: f64) -> Cylinder {
    Cylinder {
        t_start,
        t_end,
        center: [l / 2.0; 3],
        radius,
    }
}

impl NestedCylinders {
    /// `Q ⊃ Q_0 ⊃ Q_1` at the box center, for a history on `[0, 1]`.
    pub fn velocity_default(l: f64) -> NestedCylinders {
        NestedCylinders {
            outer: centered(l, 0.1, 0.95, 0.75),
            mid: centered(l, 0.2, 0.85, 0.6),
            inner: centered(l, 0.3, 0.75, 0.45),
        }
    }

    /// `Q_1 ⊃ Q_a ⊃ Q_2`, nested inside the velocity family.
    pub fn rotation_default(l: f64) -> NestedCylinders {
        NestedCylinders {
            outer: centered(l, 0.3, 0.75, 0.45),
            mid: centered(l, 0.38, 0.68, 0.35),
            inner: centered(l, 0.45, 0.6, 0.25),
        }
    }
}

fn strictly_nested(outer: &Cylinder, inner: &Cylinder, what: &str) -> Result<()> {
    if outer.center != inner.center {
        return Err(Error::Geometry(format!("{what}: cylinders must share a center")));
    }
    let margins = [
        inner.t_start - outer.t_start,
        outer.t_end - inner.t_end,
        outer.radius - inner.radius,
    ];
    if margins.iter().any(|m| !(*m > 0.0)) {
        return Err(Error::Geometry(format!(
            "{what}: nesting needs positive margins, got {margins:?}"
        )));
    }
    Ok(())
}

pub fn make_bumps(spec: &NestedCylinders, order: u32) -> Result<BumpFamily> {
    if order < 2 {
        return Err(Error::Geometry(format!("smoothstep order {order} is below C^2")));
    }
    for c in [&spec.outer, &spec.mid, &spec.inner] {
        c.validate()?;
    }
    if !(spec.outer.t_start > 0.0) {
        return Err(Error::Geometry(format!(
            "outer cylinder starts at t = {}, it must avoid t = 0",
            spec.outer.t_start
        )));
    }
    strictly_nested(&spec.outer, &spec.mid, "outer/mid")?;
    strictly_nested(&spec.mid, &spec.inner, "mid/inner")?;
    Ok(BumpFamily {
        cylinders: *spec,
        big: Cutoff::between(&spec.mid, &spec.outer, order)?,
        small: Cutoff::between(&spec.inner, &spec.mid, order)?,
    })
}

impl BumpFamily {
    pub fn samplers(&self, grid: &Grid) -> (CutoffSampler, CutoffSampler) {
        (self.big.sampler(grid), self.small.sampler(grid))
    }

    pub fn big_field(&self, grid: &Grid) -> SpaceTimeField {
        self.big.sample(grid)
    }

    pub fn small_field(&self, grid: &Grid) -> SpaceTimeField {
        self.small.sample(grid)
    }

    /// `max |big * small - small|` over the grid.
    pub fn product_defect(&self, grid: &Grid) -> f64 {
        let l = grid.l;
        (0..grid.nt)
            .flat_map(|n| (0..grid.points()).map(move |i| (n, i)))
            .map(|(n, i)| {
                let (t, x) = (grid.time(n), grid.position(i));
                let s = self.small.value(t, x, l);
                (self.big.value(t, x, l) * s - s).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Checks the family on a grid: the outer cylinder fits the box and the
    /// recorded history.
    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        self.cylinders.outer.check_padding(grid)?;
        self.cylinders.outer.check_within_history(grid)
    }
}
