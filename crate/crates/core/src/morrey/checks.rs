//! Empirical checks of the Hölder and localization inequalities.

use serde::{Deserialize, Serialize};

use super::geometry::ParabolicCylinder;
use super::norm::{family_max, morrey_norm, power_density, MorreyParams};
use super::plan::CylinderSamplingPlan;
use super::sums::cylinder_sums;
use crate::error::{Error, Result};
use crate::field::SpaceTimeField;

/// A ratio that may be undefined because both sides vanish.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Ratio {
    Value(f64),
    Sentinel(String),
}

impl Ratio {
    pub fn of(num: f64, den: f64) -> Ratio {
        if num == 0.0 && den == 0.0 {
            Ratio::Sentinel("empty".into())
        } else {
            Ratio::Value(num / den)
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Ratio::Value(v) => Some(*v),
            Ratio::Sentinel(_) => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Ratio::Sentinel(_))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: Ratio,
    /// Largest cylinder-wise ratio, for checks made cylinder by cylinder.
    pub max_cylinder_ratio: Option<f64>,
    pub cylinders_checked: usize,
    pub note: String,
}

const SLACK: f64 = 1e-12;

fn check_holder_exponents(e1: MorreyParams, e2: MorreyParams, e0: MorreyParams) -> Result<()> {
    e0.validate()?;
    e1.validate()?;
    e2.validate()?;
    let lhs = 1.0 / e1.p + 1.0 / e2.p;
    if lhs > 1.0 / e0.p + SLACK {
        return Err(Error::Exponent(format!(
            "1/p1 + 1/p2 = {lhs} exceeds 1/p0 = {}",
            1.0 / e0.p
        )));
    }
    let q = 1.0 / e1.q + 1.0 / e2.q;
    if (q - 1.0 / e0.q).abs() > SLACK {
        return Err(Error::Exponent(format!(
            "1/q1 + 1/q2 = {q} differs from 1/q0 = {}",
            1.0 / e0.q
        )));
    }
    Ok(())
}

/// Checks `||fg||_{p0,q0} <= ||f||_{p1,q1} ||g||_{p2,q2}` cylinder by cylinder.
///
/// When `1/p1 + 1/p2 < 1/p0` the classical Hölder bound on a cylinder `Q`
/// carries the factor `(|Q| / r^5)^{1/s}` with `1/s = 1/p0 - 1/p1 - 1/p2`;
/// it is applied with the lattice measure of the (time-clipped) cylinder.
pub fn check_holder(
    f: &SpaceTimeField,
    g: &SpaceTimeField,
    e1: MorreyParams,
    e2: MorreyParams,
    e0: MorreyParams,
    plan: &CylinderSamplingPlan,
) -> Result<RatioReport> {
    check_holder_exponents(e1, e2, e0)?;
    let grid = *f.grid();
    plan.validate(&grid)?;
    let fg = f.pointwise_product(g)?;
    let fam0 = cylinder_sums(&grid, &power_density(&fg, e0.p), plan);
    let fam1 = cylinder_sums(&grid, &power_density(f, e1.p), plan);
    let fam2 = cylinder_sums(&grid, &power_density(g, e2.p), plan);
    let inv_s = (1.0 / e0.p - 1.0 / e1.p - 1.0 / e2.p).max(0.0);
    let cell = grid.cell_measure();
    let h3 = grid.h().powi(3);
    let dt = grid.dt();
    let nt = fam0.times.len();
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for ((r0, r1), r2) in fam0.radii.iter().zip(&fam1.radii).zip(&fam2.radii) {
        let r = r0.r;
        for i in 0..r0.sums.len() {
            let rhs0 = e1.functional(r, r1.sums[i] * cell) * e2.functional(r, r2.sums[i] * cell);
            if rhs0 == 0.0 {
                continue;
            }
            let measure = r0.ball_cells as f64 * h3 * r0.slices[i % nt] as f64 * dt;
            let rhs = rhs0 * (measure / r.powi(5)).powf(inv_s);
            let lhs = e0.functional(r, r0.sums[i] * cell);
            worst = worst.max(lhs / rhs);
            checked += 1;
        }
    }
    let (n0, _) = family_max(&grid, &fam0, &e0);
    let (n1, _) = family_max(&grid, &fam1, &e1);
    let (n2, _) = family_max(&grid, &fam2, &e2);
    Ok(RatioReport {
        numerator: n0,
        denominator: n1 * n2,
        ratio: Ratio::of(n0, n1 * n2),
        max_cylinder_ratio: Some(worst),
        cylinders_checked: checked,
        note: format!("measure factor exponent 1/s = {inv_s}"),
    })
}

/// Reports `||1_Q f||_{p0,q0} / ||1_Q f||_{p1,q1}`; the constant is empirical.
pub fn check_localization(
    f: &SpaceTimeField,
    q_cyl: &ParabolicCylinder,
    e0: MorreyParams,
    e1: MorreyParams,
    plan: &CylinderSamplingPlan,
) -> Result<RatioReport> {
    e0.validate()?;
    e1.validate()?;
    if e0.p > e1.p + SLACK || e0.q > e1.q + SLACK || e0.p > e0.q {
        return Err(Error::Exponent(format!(
            "localization needs p0 <= p1 and p0 <= q0 <= q1, got ({}, {}) and ({}, {})",
            e0.p, e0.q, e1.p, e1.q
        )));
    }
    let ind = q_cyl.to_cylinder().indicator(f.grid());
    let local = f.multiply_scalar(&ind)?;
    let a = morrey_norm(&local, e0, plan)?;
    let b = morrey_norm(&local, e1, plan)?;
    let ratio = Ratio::of(a.norm, b.norm);
    if let Some(v) = ratio.value() {
        if !v.is_finite() {
            return Err(Error::Exponent(format!("localization ratio is not finite: {v}")));
        }
    }
    Ok(RatioReport {
        numerator: a.norm,
        denominator: b.norm,
        ratio,
        max_cylinder_ratio: None,
        cylinders_checked: a.plan_summary.cylinders,
        note: format!("cylinder measure {:.6e}", q_cyl.measure()),
    })
}
