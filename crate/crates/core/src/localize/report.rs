//! Per-term reports of the Duhamel expansions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpaceTimeField;
use crate::morrey::{morrey_norm, CylinderSamplingPlan, MorreyParams};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermReport {
    pub index: usize,
    pub label: String,
    /// Coefficient of the term in the signed sum.
    pub sign: f64,
    pub morrey_norm: Option<f64>,
    pub exponents: Option<MorreyParams>,
    pub max_abs: f64,
    pub finite: bool,
    #[serde(skip)]
    pub field: Option<SpaceTimeField>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub name: String,
    pub terms: Vec<TermReport>,
    pub sum_max_abs: f64,
    pub direct_max_abs: f64,
    /// `max |signed sum - direct| / max |direct|`.
    pub relative_residual: f64,
    pub mean_removed: f64,
    /// Sign conventions and other remarks a reader of the report needs.
    pub notes: Vec<String>,
    #[serde(skip)]
    pub signed_sum: Option<SpaceTimeField>,
    #[serde(skip)]
    pub direct: Option<SpaceTimeField>,
}

/// What to compute for every term.
#[derive(Clone, Debug, Default)]
pub struct ExpansionOptions {
    pub norm: Option<(MorreyParams, CylinderSamplingPlan)>,
    /// Keep every term field in the report; costs one history per term.
    pub keep_fields: bool,
}

/// Static description of one numbered term.
#[derive(Clone, Copy, Debug)]
pub struct TermDef {
    pub index: usize,
    pub label: &'static str,
    pub sign: f64,
}

pub(crate) struct Accumulator {
    sum: Option<SpaceTimeField>,
    terms: Vec<TermReport>,
    mean_removed: f64,
    options: ExpansionOptions,
}

impl Accumulator {
    pub fn new(options: &ExpansionOptions) -> Accumulator {
        Accumulator {
            sum: None,
            terms: Vec::new(),
            mean_removed: 0.0,
            options: options.clone(),
        }
    }

    pub fn note_mean(&mut self, m: f64) {
        self.mean_removed = self.mean_removed.max(m);
    }

    pub fn add(&mut self, def: TermDef, field: SpaceTimeField) -> Result<()> {
        let finite = field.values().iter().all(|v| v.is_finite());
        let (morrey, exps) = match (&self.options.norm, finite) {
            (Some((params, plan)), true) => (Some(morrey_norm(&field, *params, plan)?.norm), Some(*params)),
            (Some((params, _)), false) => (None, Some(*params)),
            _ => (None, None),
        };
        match self.sum.as_mut() {
            Some(s) => s.add_scaled(&field, def.sign)?,
            None => self.sum = Some(field.scaled(def.sign)),
        }
        self.terms.push(TermReport {
            index: def.index,
            label: def.label.to_string(),
            sign: def.sign,
            morrey_norm: morrey,
            exponents: exps,
            max_abs: field.max_abs(),
            finite: finite && morrey.map_or(true, f64::is_finite),
            field: self.options.keep_fields.then_some(field),
        });
        Ok(())
    }

    pub fn finish(self, name: &str, direct: SpaceTimeField) -> Result<ExpansionReport> {
        let sum = self.sum.ok_or_else(|| Error::Shape("expansion has no terms".into()))?;
        let diff = sum.max_abs_diff(&direct)?;
        let scale = direct.max_abs();
        let relative_residual = if scale > 0.0 {
            diff / scale
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        let keep = self.options.keep_fields;
        Ok(ExpansionReport {
            name: name.to_string(),
            terms: self.terms,
            sum_max_abs: sum.max_abs(),
            direct_max_abs: scale,
            relative_residual,
            mean_removed: self.mean_removed,
            notes: Vec::new(),
            signed_sum: keep.then_some(sum),
            direct: keep.then_some(direct),
        })
    }
}

impl ExpansionReport {
    pub fn all_finite(&self) -> bool {
        self.terms.iter().all(|t| t.finite) && self.relative_residual.is_finite()
    }
}

/// Max-abs residual of an identity, absolute and relative to its left side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub max_abs: f64,
    pub scale: f64,
    pub relative: f64,
}

impl IdentityResidual {
    pub fn new(max_abs: f64, scale: f64) -> IdentityResidual {
        let relative = if scale > 0.0 {
            max_abs / scale
        } else if max_abs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        IdentityResidual { max_abs, scale, relative }
    }

    pub fn between(lhs: &SpaceTimeField, rhs: &SpaceTimeField) -> Result<IdentityResidual> {
        Ok(IdentityResidual::new(lhs.max_abs_diff(rhs)?, lhs.max_abs()))
    }
}
