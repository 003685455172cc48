use serde::{Deserialize, Serialize};

use super::geometry::ParabolicCylinder;
use super::plan::{CylinderSamplingPlan, PlanSummary};
use super::sums::{cylinder_sums, CylinderFamily};
use crate::error::{Error, Result};
use crate::field::{Grid, SpaceTimeField};
use crate::scalar::Real;

/// Exponents of `M^{p,q}`, `1 < p <= q < infinity`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorreyParams {
    pub p: f64,
    pub q: f64,
}

impl MorreyParams {
    pub fn new(p: f64, q: f64) -> Result<MorreyParams> {
        let m = MorreyParams { p, q };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p <= self.q && self.q.is_finite()) {
            return Err(Error::Exponent(format!(
                "need 1 < p <= q < inf, got p = {}, q = {}",
                self.p, self.q
            )));
        }
        Ok(())
    }

    /// Normalized cylinder functional `(r^{-5(1-p/q)} S)^{1/p}`.
    pub fn functional(&self, r: f64, integral: f64) -> f64 {
        normalized_functional(self.p, self.q, r, integral)
    }
}

/// `(r^{-5(1-p/q)} S)^{1/p}` in any floating point type.
pub fn normalized_functional<T: Real>(p: T, q: T, r: T, integral: T) -> T {
    let five = T::lit(5.0);
    (r.powf(-five * (T::one() - p / q)) * integral).powf(T::one() / p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub norm: f64,
    pub argmax_cylinder: Option<ParabolicCylinder>,
    pub plan_summary: PlanSummary,
}

/// Pointwise `|f|^p` as a flat scalar array.
pub fn power_density(f: &SpaceTimeField, p: f64) -> Vec<f64> {
    let m = f.magnitude();
    m.values().iter().map(|v| v.powf(p)).collect()
}

pub(crate) fn cylinder_at(grid: &Grid, spatial: usize, slice: usize, r: f64) -> ParabolicCylinder {
    ParabolicCylinder {
        t0: grid.time(slice),
        x0: grid.position(spatial),
        r,
    }
}

/// Maximum of the normalized functional over a precomputed family.
pub fn family_max(grid: &Grid, fam: &CylinderFamily, params: &MorreyParams) -> (f64, Option<ParabolicCylinder>) {
    let cell = grid.cell_measure();
    let nt = fam.times.len();
    let mut best = 0.0;
    let mut arg = None;
    for rs in &fam.radii {
        for (i, &s) in rs.sums.iter().enumerate() {
            if s <= 0.0 {
                continue;
            }
            let v = params.functional(rs.r, s * cell);
            if v > best {
                best = v;
                arg = Some(cylinder_at(grid, fam.spatial[i / nt], fam.times[i % nt], rs.r));
            }
        }
    }
    (best, arg)
}

/// Lower estimate of the parabolic Morrey norm over the plan's cylinders.
pub fn morrey_norm(f: &SpaceTimeField, params: MorreyParams, plan: &CylinderSamplingPlan) -> Result<NormEstimate> {
    params.validate()?;
    plan.validate(f.grid())?;
    let fam = cylinder_sums(f.grid(), &power_density(f, params.p), plan);
    let (norm, argmax_cylinder) = family_max(f.grid(), &fam, &params);
    Ok(NormEstimate {
        norm,
        argmax_cylinder,
        plan_summary: plan.summary(f.grid()),
    })
}

/// Space-time `L^p` norm by the same cell quadrature.
pub fn lebesgue_norm(f: &SpaceTimeField, p: f64) -> f64 {
    f.integral_of_power(p).powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn functional_generic_in_precision() {
        let a = normalized_functional(2.0f64, 4.0, 2.0, 10.0);
        let b = normalized_functional(2.0f32, 4.0, 2.0, 10.0);
        assert!((a - b as f64).abs() < 1e-5);
        // p = q: plain L^p
        assert!((normalized_functional(3.0f64, 3.0, 0.5, 8.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn params_reject_bad_ordering() {
        assert!(MorreyParams::new(1.0, 2.0).is_err());
        assert!(MorreyParams::new(3.0, 2.0).is_err());
        assert!(MorreyParams::new(2.0, f64::INFINITY).is_err());
        assert!(MorreyParams::new(2.0, 2.0).is_ok());
    }
}
