//! Desk-scale check of the local hypothesis and the two integrability
//! conclusions on nested cylinders `Q ⊃ Q1 ⊃ Q2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldHistory, SpaceTimeField};
use crate::localize::NestedCylinders;
use crate::morrey::{morrey_norm, Cylinder, CylinderSamplingPlan, MorreyParams, ParabolicCylinder};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoremCylinders {
    pub q: Cylinder,
    pub q1: Cylinder,
    pub q2: Cylinder,
}

impl TheoremCylinders {
    /// `Q` and `Q1` of the velocity family, `Q2` of the rotation family.
    pub fn default_for(l: f64) -> TheoremCylinders {
        let v = NestedCylinders::velocity_default(l);
        let w = NestedCylinders::rotation_default(l);
        TheoremCylinders {
            q: v.outer,
            q1: v.inner,
            q2: w.inner,
        }
    }

    pub fn validate(&self, l: f64) -> Result<()> {
        for (name, c) in [("Q", &self.q), ("Q1", &self.q1), ("Q2", &self.q2)] {
            c.validate()?;
            if c.t_start <= 0.0 {
                return Err(Error::Geometry(format!("{name} must avoid t = 0, starts at {}", c.t_start)));
            }
        }
        if !self.q.strictly_contains(&self.q1, l) {
            return Err(Error::Geometry("Q1 is not strictly inside Q".into()));
        }
        if !self.q1.strictly_contains(&self.q2, l) {
            return Err(Error::Geometry("Q2 is not strictly inside Q1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub p0: f64,
    pub q0: f64,
    /// `||1_Q u||_{M^{p0,q0}}`.
    pub hypothesis_norm: f64,
    pub hypothesis_argmax: Option<ParabolicCylinder>,
    /// `||1_{Q1} u||_{L^{q0}}`.
    pub velocity_conclusion: f64,
    /// `||1_{Q2} omega||_{L^{q0}}`.
    pub rotation_conclusion: f64,
    /// `||1_{Q2} omega||_{L^{15/4}}`, the upper end of the microrotation window.
    pub rotation_window_norm: f64,
    pub all_finite: bool,
}

/// `(sum over cells of Q of |f|^p)^{1/p}` with the history's cell rule.
pub fn cylinder_lebesgue_norm(f: &dyn FieldHistory, q: &Cylinder, p: f64) -> f64 {
    let g = *f.grid();
    let pts = g.points();
    let comps = f.components();
    let per_slice: Vec<f64> = (0..g.nt)
        .into_par_iter()
        .filter(|&n| {
            let t = g.time(n);
            t > q.t_start && t < q.t_end
        })
        .map(|n| {
            let s = f.slice(n);
            let mut acc = 0.0;
            for i in 0..pts {
                if q.axis_distance(g.position(i), g.l) < q.radius {
                    let m2: f64 = (0..comps).map(|c| s[c * pts + i].powi(2)).sum();
                    acc += m2.powf(p / 2.0);
                }
            }
            acc
        })
        .collect();
    // summed in slice order so the result does not depend on the thread count
    let sum: f64 = per_slice.iter().sum();
    (sum * g.cell_measure()).powf(1.0 / p)
}

pub fn hypothesis_check(
    u: &SpaceTimeField,
    omega: &SpaceTimeField,
    cylinders: &TheoremCylinders,
    p0: f64,
    q0: f64,
    plan: &CylinderSamplingPlan,
) -> Result<HypothesisReport> {
    let grid = *u.grid();
    if omega.grid() != &grid {
        return Err(Error::Shape("velocity and microrotation grids differ".into()));
    }
    cylinders.validate(grid.l)?;
    cylinders.q.check_within_history(&grid)?;
    let params = MorreyParams::new(p0, q0)?;
    let local = u.multiply_scalar(&cylinders.q.indicator(&grid))?;
    let est = morrey_norm(&local, params, plan)?;
    drop(local);
    let velocity_conclusion = cylinder_lebesgue_norm(u, &cylinders.q1, q0);
    let rotation_conclusion = cylinder_lebesgue_norm(omega, &cylinders.q2, q0);
    let rotation_window_norm = cylinder_lebesgue_norm(omega, &cylinders.q2, 15.0 / 4.0);
    let all_finite = [est.norm, velocity_conclusion, rotation_conclusion, rotation_window_norm]
        .iter()
        .all(|v| v.is_finite());
    Ok(HypothesisReport {
        p0,
        q0,
        hypothesis_norm: est.norm,
        hypothesis_argmax: est.argmax_cylinder,
        velocity_conclusion,
        rotation_conclusion,
        rotation_window_norm,
        all_finite,
    })
}
