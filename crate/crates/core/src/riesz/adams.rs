//! Empirical Adams–Hedberg check: `I_a` maps `M^{p,q}` into `M^{p/nu, q/nu}`
//! with `nu = 1 - aq/5`.

use serde::{Deserialize, Serialize};

use super::potential::{riesz_apply, RieszOrder};
use crate::error::{Error, Result};
use crate::field::SpaceTimeField;
use crate::morrey::{morrey_norm, parabolic_rescale, CylinderSamplingPlan, MorreyParams, Ratio, RatioReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSample {
    pub lambda: f64,
    pub ratio: Ratio,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamsHedbergReport {
    pub order: f64,
    pub nu: f64,
    pub source: MorreyParams,
    pub target: MorreyParams,
    pub report: RatioReport,
    /// Ratio of the dilated field, one sample per scale.
    pub rescaled: Vec<ScaleSample>,
    /// `max / min - 1` over all samples, `None` when every sample is empty.
    pub scale_spread: Option<f64>,
    pub scale_invariant: bool,
}

/// Relative spread allowed between the ratios at different scales.
pub const SCALE_TOLERANCE: f64 = 0.10;

fn exponents(p: f64, q: f64, a: f64) -> Result<(RieszOrder, MorreyParams, MorreyParams, f64)> {
    let order = RieszOrder::new(a)?;
    let source = MorreyParams::new(p, q)?;
    order.check_for_q(q)?;
    let nu = 1.0 - a * q / 5.0;
    let target = MorreyParams::new(p / nu, q / nu)?;
    Ok((order, source, target, nu))
}

/// `||I_a f||_{p/nu, q/nu} / ||f||_{p,q}` on one field.
pub fn adams_hedberg_ratio(f: &SpaceTimeField, p: f64, q: f64, a: f64, plan: &CylinderSamplingPlan) -> Result<RatioReport> {
    let (order, source, target, nu) = exponents(p, q, a)?;
    let num = morrey_norm(&riesz_apply(f, order)?, target, plan)?;
    let den = morrey_norm(f, source, plan)?;
    let ratio = Ratio::of(num.norm, den.norm);
    if let Some(v) = ratio.value() {
        if !v.is_finite() {
            return Err(Error::Exponent(format!("Adams–Hedberg ratio is not finite: {v}")));
        }
    }
    Ok(RatioReport {
        numerator: num.norm,
        denominator: den.norm,
        ratio,
        max_cylinder_ratio: None,
        cylinders_checked: den.plan_summary.cylinders,
        note: format!("nu = {nu}"),
    })
}

/// Ratio at each dyadic scale, with the plan dilated along with the field.
pub fn adams_hedberg_scale_study(
    f: &SpaceTimeField,
    p: f64,
    q: f64,
    a: f64,
    plan: &CylinderSamplingPlan,
    lambdas: &[f64],
) -> Result<Vec<ScaleSample>> {
    lambdas
        .iter()
        .map(|&lambda| {
            let fl = parabolic_rescale(f, lambda)?;
            let rep = adams_hedberg_ratio(&fl, p, q, a, &plan.rescaled(1.0 / lambda))?;
            Ok(ScaleSample { lambda, ratio: rep.ratio })
        })
        .collect()
}

fn spread(samples: &[Ratio]) -> Option<f64> {
    let vals: Vec<f64> = samples.iter().filter_map(Ratio::value).collect();
    if vals.is_empty() {
        return None;
    }
    let max = vals.iter().cloned().fold(f64::MIN, f64::max);
    let min = vals.iter().cloned().fold(f64::MAX, f64::min);
    Some(if min > 0.0 { max / min - 1.0 } else { f64::INFINITY })
}

/// Ratio of `f` plus its values for `f` dilated by 1/2 and 1/4.
pub fn adams_hedberg_check(
    f: &SpaceTimeField,
    p: f64,
    q: f64,
    a: f64,
    plan: &CylinderSamplingPlan,
) -> Result<AdamsHedbergReport> {
    let (_, source, target, nu) = exponents(p, q, a)?;
    let report = adams_hedberg_ratio(f, p, q, a, plan)?;
    let rescaled = adams_hedberg_scale_study(f, p, q, a, plan, &[0.5, 0.25])?;
    let mut all: Vec<Ratio> = vec![report.ratio.clone()];
    all.extend(rescaled.iter().map(|s| s.ratio.clone()));
    let scale_spread = spread(&all);
    Ok(AdamsHedbergReport {
        order: a,
        nu,
        source,
        target,
        report,
        rescaled,
        scale_spread,
        scale_invariant: scale_spread.map_or(true, |s| s <= SCALE_TOLERANCE),
    })
}
