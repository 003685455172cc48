use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bootstrap::TheoremCylinders;
use crate::error::{Error, Result};
use crate::localize::{make_bumps, NestedCylinders, DEFAULT_ORDER};
use crate::morrey::{CylinderSamplingPlan, Event};
use crate::solver::SolverConfig;

/// Pass thresholds of the acceptance checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative residual of the two vector identities.
    pub identity: f64,
    /// Relative residual of the three-part reconstructions and the `W_1` split.
    pub reconstruction: f64,
    /// Relative residual of the signed term sums against the direct pipelines.
    pub term_sum: f64,
    /// Morrey norm against direct `L^p` quadrature when `p = q`.
    pub lebesgue: f64,
    /// Relative error of the indicator closed forms.
    pub indicator: f64,
    /// Relative error of the dilation laws.
    pub scaling: f64,
    /// Spread of the Adams–Hedberg ratio over scales.
    pub adams_hedberg: f64,
    /// Slack above one of the cylinder-wise Hölder ratio.
    pub holder: f64,
    /// Per-step `max |div u| / max |u|`.
    pub divergence: f64,
    /// Linear mode decay against the exponential closed form.
    pub mode_decay: f64,
    /// Energy growth allowed per unit time, relative to the initial energy.
    pub energy_growth: f64,
    /// Lower bound on the error ratio when the step is halved.
    pub convergence_ratio: f64,
    /// Duhamel single-mode closed form.
    pub duhamel: f64,
    /// Accepted range of the local energy log-log slope.
    pub slope_range: (f64, f64),
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            identity: 1e-8,
            reconstruction: 1e-8,
            term_sum: 1e-7,
            lebesgue: 1e-10,
            indicator: 0.02,
            scaling: 0.05,
            adams_hedberg: 0.10,
            holder: 1e-9,
            divergence: 1e-10,
            mode_decay: 1e-10,
            energy_growth: 1e-6,
            convergence_ratio: 3.5,
            duhamel: 1e-6,
            slope_range: (3.5, 4.5),
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("identity", self.identity),
            ("reconstruction", self.reconstruction),
            ("term_sum", self.term_sum),
            ("lebesgue", self.lebesgue),
            ("indicator", self.indicator),
            ("scaling", self.scaling),
            ("adams_hedberg", self.adams_hedberg),
            ("holder", self.holder),
            ("divergence", self.divergence),
            ("mode_decay", self.mode_decay),
            ("energy_growth", self.energy_growth),
            ("convergence_ratio", self.convergence_ratio),
            ("duhamel", self.duhamel),
            ("slope_range.0", self.slope_range.0),
            ("slope_range.1", self.slope_range.1),
        ];
        for (name, v) in named {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        if self.slope_range.0 >= self.slope_range.1 {
            return Err(Error::Config("slope_range is empty".into()));
        }
        Ok(())
    }
}

/// Hypothesis exponents of the velocity and the exponents at which the
/// microrotation terms are measured.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Exponents {
    pub p0: f64,
    pub q0: f64,
    /// Inside `10/3 < p <= q <= 15/4`.
    pub omega_p: f64,
    pub omega_q: f64,
}

impl Default for Exponents {
    fn default() -> Self {
        Exponents {
            p0: 3.0,
            q0: 6.0,
            omega_p: 3.75,
            omega_q: 3.75,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonitorConfig {
    /// Defaults to the centre of the innermost microrotation cylinder.
    pub center: Option<Event>,
    pub radii: Vec<f64>,
    /// Smallness threshold whose crossing radius is reported.
    pub eps_star: f64,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig {
            center: None,
            radii: vec![0.6, 0.45, 0.3, 0.2, 0.15, 0.1],
            eps_star: 0.05,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory for the report, CSV tables and plot bundle; nothing is
    /// written when absent.
    pub dir: Option<PathBuf>,
    /// Also write the simulated `(u, omega)` history as a PMF1 file.
    pub save_state: bool,
}

/// Everything a pipeline run depends on. The top-level `seed` replaces the
/// solver seed and seeds the random field sets of the standalone checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub solver: SolverConfig,
    /// `Q ⊃ Q_0 ⊃ Q_1`.
    pub velocity_cylinders: NestedCylinders,
    /// `Q_1 ⊃ Q_a ⊃ Q_2`; the outer cylinder must equal the inner velocity one.
    pub rotation_cylinders: NestedCylinders,
    pub cutoff_order: u32,
    pub exponents: Exponents,
    /// Defaults to the densest admissible plan of the solver grid.
    pub plan: Option<CylinderSamplingPlan>,
    /// Number of refinement levels in the plan study, coarsest first.
    pub refinement_levels: usize,
    pub monitor: MonitorConfig,
    pub tolerances: Tolerances,
    pub output: OutputConfig,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let solver = SolverConfig::default();
        let l = solver.grid.l;
        ExperimentConfig {
            solver,
            velocity_cylinders: NestedCylinders::velocity_default(l),
            rotation_cylinders: NestedCylinders::rotation_default(l),
            cutoff_order: DEFAULT_ORDER,
            exponents: Exponents::default(),
            plan: None,
            refinement_levels: 3,
            monitor: MonitorConfig::default(),
            tolerances: Tolerances::default(),
            output: OutputConfig::default(),
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        ExperimentConfig::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn effective_solver(&self) -> SolverConfig {
        SolverConfig {
            seed: self.seed,
            ..self.solver.clone()
        }
    }

    pub fn effective_plan(&self) -> CylinderSamplingPlan {
        self.plan.unwrap_or_else(|| CylinderSamplingPlan::default_for(&self.solver.grid))
    }

    pub fn theorem_cylinders(&self) -> TheoremCylinders {
        TheoremCylinders {
            q: self.velocity_cylinders.outer,
            q1: self.velocity_cylinders.inner,
            q2: self.rotation_cylinders.inner,
        }
    }

    pub fn monitor_center(&self) -> Event {
        self.monitor.center.unwrap_or_else(|| {
            let q2 = self.rotation_cylinders.inner;
            Event {
                t: 0.5 * (q2.t_start + q2.t_end),
                x: q2.center,
            }
        })
    }

    /// Every check that needs no computation: geometry, exponents,
    /// tolerances and the sampling plan.
    pub fn validate(&self) -> Result<()> {
        let stage = |e: Error| e.at_stage("config");
        self.solver.validate().map_err(stage)?;
        let grid = self.solver.grid;
        make_bumps(&self.velocity_cylinders, self.cutoff_order).map_err(stage)?;
        make_bumps(&self.rotation_cylinders, self.cutoff_order).map_err(stage)?;
        if self.rotation_cylinders.outer != self.velocity_cylinders.inner {
            return Err(stage(Error::Geometry(
                "the outer rotation cylinder must be the inner velocity cylinder".into(),
            )));
        }
        let all = [
            self.velocity_cylinders.outer,
            self.velocity_cylinders.mid,
            self.velocity_cylinders.inner,
            self.rotation_cylinders.mid,
            self.rotation_cylinders.inner,
        ];
        for c in &all {
            if c.t_start <= 0.0 {
                return Err(stage(Error::Geometry(format!("cylinder {c:?} touches t = 0"))));
            }
            c.check_within_history(&grid).map_err(stage)?;
        }
        self.theorem_cylinders().validate(grid.l).map_err(stage)?;
        self.tolerances.validate().map_err(stage)?;
        let e = &self.exponents;
        crate::bootstrap::bootstrap_chain(e.p0, e.q0).map_err(stage)?;
        crate::localize::check_omega_window(e.omega_p, e.omega_q).map_err(stage)?;
        self.effective_plan().validate(&grid).map_err(stage)?;
        if self.monitor.radii.is_empty() || self.monitor.radii.iter().any(|r| !(*r > 0.0)) {
            return Err(stage(Error::Config("monitor radii must be positive".into())));
        }
        if !(self.monitor.eps_star > 0.0) {
            return Err(stage(Error::Config("eps_star must be positive".into())));
        }
        let c = self.monitor_center();
        let rmax = self.monitor.radii.iter().cloned().fold(0.0, f64::max);
        if c.t - rmax * rmax < 0.0 || c.t + rmax * rmax > grid.t || 2.0 * rmax >= grid.l {
            return Err(stage(Error::Geometry(format!(
                "monitor radius {rmax} at t0 = {} leaves the history",
                c.t
            ))));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_round_trips() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let back = ExperimentConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(ExperimentConfig::from_json("{}").is_ok());
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(ExperimentConfig::from_json(r#"{"sead": 3}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"tolerances": {"identiy": 1e-8}}"#).is_err());
    }

    #[test]
    fn zero_tolerance_is_rejected() {
        let mut cfg = ExperimentConfig::default();
        cfg.tolerances.holder = 0.0;
        assert!(cfg.validate().is_err());
    }
}
