//! Empirical constant of the `L^{10/3}` interpolation bound for the
//! microrotation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{FieldHistory, SpaceTimeField};
use crate::morrey::{Cylinder, Ratio, RatioReport};

/// `||1_Q w||_{L^{10/3}}` against `||w||_{L^inf L^2}^{2/5} ||grad w||_{L^2 L^2}^{3/5}`,
/// with the right side taken over the whole box on the time span of `Q`.
/// Every integral uses the cell rule of the history grid.
pub fn interpolation_check(omega: &SpaceTimeField, q: &Cylinder) -> Result<RatioReport> {
    q.validate()?;
    let grid = *omega.grid();
    q.check_within_history(&grid)?;
    if omega.components() != 3 {
        return Err(Error::Shape(format!("microrotation needs 3 components, got {}", omega.components())));
    }
    let slices: Vec<usize> = (0..grid.nt)
        .filter(|&n| {
            let t = grid.time(n);
            t > q.t_start && t < q.t_end
        })
        .collect();
    if slices.is_empty() {
        return Err(Error::Geometry(format!(
            "time interval ]{}, {}[ contains no stored slice",
            q.t_start, q.t_end
        )));
    }
    let p = grid.points();
    let h3 = grid.h().powi(3);
    let dt = grid.dt();
    let l = grid.l;
    let exponent = 10.0 / 3.0;
    // per slice: (local L^{10/3} mass, L^2 mass, gradient L^2 mass)
    let parts: Vec<(f64, f64, f64)> = slices
        .par_iter()
        .map(|&n| {
            let s = omega.slice(n);
            let mut local = 0.0;
            let mut mass = 0.0;
            for i in 0..p {
                let m2: f64 = (0..3).map(|c| s[c * p + i].powi(2)).sum();
                mass += m2;
                if q.axis_distance(grid.position(i), l) < q.radius {
                    local += m2.powf(exponent / 2.0);
                }
            }
            let spec = FieldHistory::spectral_slice(omega, n);
            let grad: f64 = (0..3).map(|j| spec.partial(j).l2_norm().powi(2)).sum();
            (local * h3, mass * h3, grad)
        })
        .collect();
    let num = parts.iter().map(|v| v.0).sum::<f64>() * dt;
    let num = num.powf(1.0 / exponent);
    let sup = parts.iter().map(|v| v.1).fold(0.0f64, f64::max).sqrt();
    let grad = (parts.iter().map(|v| v.2).sum::<f64>() * dt).sqrt();
    let den = sup.powf(0.4) * grad.powf(0.6);
    let ratio = Ratio::of(num, den);
    if let Some(v) = ratio.value() {
        if !v.is_finite() {
            return Err(Error::Exponent(format!("interpolation ratio is not finite: {v}")));
        }
    }
    Ok(RatioReport {
        numerator: num,
        denominator: den,
        ratio,
        max_cylinder_ratio: None,
        cylinders_checked: 1,
        note: format!(
            "sup L2 = {sup:.6e}, gradient L2L2 = {grad:.6e}, {} slices",
            slices.len()
        ),
    })
}
