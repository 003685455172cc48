//! solve → velocity decomposition and norms → bootstrap → microrotation
//! decomposition and norms → monitors → acceptance.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bootstrap::{
    bootstrap_chain, ckn_monitor, hypothesis_check, omega_window, sigma, EnergyMonitorSeries, HypothesisReport,
};
use crate::error::{Error, Result};
use crate::field::{FieldHistory, SpaceTimeField};
use crate::localize::{
    decompose_u, decompose_w, expand_u1_terms, expand_w1a_terms, expand_w1b_terms, expand_w1c_terms, make_bumps,
    ExpansionOptions, ExpansionReport, FlowFields, ReconstructionSummary,
};
use crate::morrey::{morrey_norm, CylinderSamplingPlan, MorreyParams, RatioReport};
use crate::scalar::{decimal_rational, ExponentScalar};
use crate::solver::{interpolation_check, simulate, Diagnostics, Drives, History};
use crate::Exact;

use super::config::ExperimentConfig;
use super::criteria::{self, ReconstructionInputs};
use super::plots::{emit_plots, PlotBundle};
use super::report::AcceptanceReport;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub steps: usize,
    pub dt: f64,
    pub max_div_ratio: f64,
    pub initial: Diagnostics,
    pub last: Diagnostics,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VelocityStage {
    pub reconstruction: ReconstructionSummary,
    /// `(sigma, q0)`, where every velocity term is measured.
    pub term_exponents: MorreyParams,
    pub terms: ExpansionReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementPoint {
    pub plan: CylinderSamplingPlan,
    pub cylinders: usize,
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapStage {
    /// Exact exponents `p_0, p_1, ...` of the chain.
    pub chain: Vec<String>,
    pub chain_f64: Vec<f64>,
    pub nu: String,
    pub q1: String,
    pub i1_target: String,
    pub i2_target: String,
    pub hypothesis: HypothesisReport,
    /// Hypothesis norm on successively refined plans, coarsest first.
    pub refinement: Vec<RefinementPoint>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RotationStage {
    pub reconstruction: ReconstructionSummary,
    pub split_relative: f64,
    pub term_exponents: MorreyParams,
    pub w1a: ExpansionReport,
    pub w1b: ExpansionReport,
    pub w1c: ExpansionReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorStage {
    pub series: EnergyMonitorSeries,
    pub eps_star: f64,
    /// Largest radius below which the monitor stays under `eps_star`.
    pub crossing: Option<f64>,
    /// `||1_Q omega||_{L^{10/3}}` against its interpolation bound on the
    /// outer microrotation cylinder.
    pub interpolation: RatioReport,
}

/// Everything the pipeline computes. Holds no timings, so equal inputs give
/// byte-identical serializations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineReport {
    pub config: ExperimentConfig,
    pub solver: SolverSummary,
    pub velocity: VelocityStage,
    pub bootstrap: BootstrapStage,
    pub rotation: RotationStage,
    pub monitor: MonitorStage,
    pub acceptance: AcceptanceReport,
}

impl PipelineReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<PipelineReport> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read report {}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// SHA-256 of the JSON serialization.
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_json()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn expansions(&self) -> [&ExpansionReport; 4] {
        [&self.velocity.terms, &self.rotation.w1a, &self.rotation.w1b, &self.rotation.w1c]
    }

    pub fn terms_csv(&self) -> String {
        let mut s = String::from("expansion,index,label,sign,p,q,morrey_norm,max_abs,finite\n");
        for e in self.expansions() {
            for t in &e.terms {
                let (p, q) = t.exponents.map_or((String::new(), String::new()), |m| (m.p.to_string(), m.q.to_string()));
                let norm = t.morrey_norm.map_or(String::new(), |v| format!("{v:.12e}"));
                s.push_str(&format!(
                    "{},{},\"{}\",{},{p},{q},{norm},{:.12e},{}\n",
                    e.name, t.index, t.label, t.sign, t.max_abs, t.finite
                ));
            }
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

pub struct PipelineOutcome {
    pub report: PipelineReport,
    pub hash: String,
    pub timings: Vec<StageTiming>,
    /// Kept only when the caller asks for it.
    pub history: Option<History>,
}

struct Clock {
    timings: Vec<StageTiming>,
    start: Instant,
    verbose: bool,
}

impl Clock {
    fn lap(&mut self, stage: &str) {
        let seconds = self.start.elapsed().as_secs_f64();
        if self.verbose {
            eprintln!("stage {stage}: {seconds:.1} s");
        }
        self.timings.push(StageTiming {
            stage: stage.into(),
            seconds,
        });
        self.start = Instant::now();
    }
}

fn exact(v: f64) -> Result<Exact> {
    decimal_rational(v).ok_or_else(|| Error::Exponent(format!("exponent {v} is not finite")))
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.at_stage(name))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PipelineOptions {
    /// Stage timings on stderr.
    pub verbose: bool,
    /// Return the simulated history with the outcome.
    pub keep_history: bool,
}

fn velocity_stage(cfg: &ExperimentConfig, flow: &FlowFields, plan: &CylinderSamplingPlan) -> Result<VelocityStage> {
    let bumps = make_bumps(&cfg.velocity_cylinders, cfg.cutoff_order)?;
    let reconstruction = decompose_u(flow.u, &bumps)?.summary;
    let e = &cfg.exponents;
    let s = sigma(&exact(e.p0)?, &exact(e.q0)?).to_f64_value();
    let term_exponents = MorreyParams::new(s, e.q0)?;
    let options = ExpansionOptions {
        norm: Some((term_exponents, *plan)),
        keep_fields: false,
    };
    let terms = expand_u1_terms(flow, &bumps, &options)?;
    Ok(VelocityStage {
        reconstruction,
        term_exponents,
        terms,
    })
}

/// Plans from coarse to `plan`: level `j` doubles the smallest radius and
/// both strides `j` times. Inadmissible levels are skipped.
pub fn refinement_plans(plan: &CylinderSamplingPlan, levels: usize, grid: &crate::field::Grid) -> Vec<CylinderSamplingPlan> {
    (0..levels.max(1))
        .rev()
        .map(|j| {
            let f = 1usize << j;
            CylinderSamplingPlan {
                r_min: plan.r_min * f as f64,
                r_max: plan.r_max,
                stride_x: plan.stride_x * f,
                stride_t: plan.stride_t * f,
            }
        })
        .filter(|p| p.validate(grid).is_ok())
        .collect()
}

fn bootstrap_stage(
    cfg: &ExperimentConfig,
    velocity: &VelocityStage,
    u: &SpaceTimeField,
    omega: &SpaceTimeField,
    plan: &CylinderSamplingPlan,
) -> Result<BootstrapStage> {
    let e = &cfg.exponents;
    let q0 = exact(velocity.term_exponents.q)?;
    let chain = bootstrap_chain(exact(e.p0)?, q0.clone())?;
    let window = omega_window(q0)?;
    let cylinders = cfg.theorem_cylinders();
    let hypothesis = hypothesis_check(u, omega, &cylinders, e.p0, e.q0, plan)?;
    let local = u.multiply_scalar(&cylinders.q.indicator(u.grid()))?;
    let params = MorreyParams::new(e.p0, e.q0)?;
    let mut refinement = Vec::new();
    for p in refinement_plans(plan, cfg.refinement_levels, u.grid()) {
        let est = morrey_norm(&local, params, &p)?;
        refinement.push(RefinementPoint {
            plan: p,
            cylinders: est.plan_summary.cylinders,
            norm: est.norm,
        });
    }
    Ok(BootstrapStage {
        chain: chain.states.iter().map(|s| s.p.to_string()).collect(),
        chain_f64: chain.exponents_f64(),
        nu: chain.states[0].nu.to_string(),
        q1: window.q1.to_string(),
        i1_target: window.i1.target.to_string(),
        i2_target: window.i2.target.to_string(),
        hypothesis,
        refinement,
    })
}

fn rotation_stage(
    cfg: &ExperimentConfig,
    boot: &BootstrapStage,
    u: &SpaceTimeField,
    omega: &SpaceTimeField,
    plan: &CylinderSamplingPlan,
) -> Result<RotationStage> {
    // the velocity conclusion is what the microrotation side rests on
    if !boot.hypothesis.all_finite {
        return Err(Error::Exponent("velocity norms are not finite; the microrotation stage has no input".into()));
    }
    let bumps = make_bumps(&cfg.rotation_cylinders, cfg.cutoff_order)?;
    let d = decompose_w(omega, &bumps)?;
    let (reconstruction, split_relative) = (d.reconstruction, d.split.relative);
    drop(d);
    let e = &cfg.exponents;
    let term_exponents = MorreyParams::new(e.omega_p, e.omega_q)?;
    let options = ExpansionOptions {
        norm: Some((term_exponents, *plan)),
        keep_fields: false,
    };
    let w1a = expand_w1a_terms(u, omega, &bumps, &options)?;
    let plain = ExpansionOptions::default();
    let w1b = expand_w1b_terms(u, omega, &bumps, &plain)?;
    let w1c = expand_w1c_terms(omega, &bumps, &plain)?;
    Ok(RotationStage {
        reconstruction,
        split_relative,
        term_exponents,
        w1a,
        w1b,
        w1c,
    })
}

fn monitor_stage(cfg: &ExperimentConfig, u: &dyn FieldHistory, omega: &SpaceTimeField) -> Result<MonitorStage> {
    let series = ckn_monitor(u, omega, cfg.monitor_center(), &cfg.monitor.radii)?;
    let crossing = series.crossing(cfg.monitor.eps_star);
    let interpolation = interpolation_check(omega, &cfg.rotation_cylinders.outer)?;
    Ok(MonitorStage {
        series,
        eps_star: cfg.monitor.eps_star,
        crossing,
        interpolation,
    })
}

pub fn run_pipeline(cfg: &ExperimentConfig, options: PipelineOptions) -> Result<PipelineOutcome> {
    stage("config", cfg.validate())?;
    let mut clock = Clock {
        timings: Vec::new(),
        start: Instant::now(),
        verbose: options.verbose,
    };
    let solver_cfg = cfg.effective_solver();
    let traj = stage("solve", simulate(&solver_cfg))?;
    let history = traj
        .history
        .ok_or_else(|| Error::Config("the solver horizon is zero".into()).at_stage("solve"))?;
    let solver = SolverSummary {
        steps: traj.steps,
        dt: traj.dt,
        max_div_ratio: traj.max_div_ratio,
        initial: traj.diagnostics[0],
        last: *traj.diagnostics.last().expect("one diagnostic per slice"),
    };
    let drives = stage("solve", Drives::from_config(&solver_cfg))?;
    let grid = *history.grid();
    let (a, f) = (drives.a_history(&grid), drives.f_history(&grid));
    clock.lap("solve");

    let plan = cfg.effective_plan();
    let flow = FlowFields {
        u: &history.u,
        omega: &history.omega,
        a: &a,
        f: &f,
    };
    let velocity = stage("velocity", velocity_stage(cfg, &flow, &plan))?;
    clock.lap("velocity");
    let boot = stage("bootstrap", bootstrap_stage(cfg, &velocity, &history.u, &history.omega, &plan))?;
    clock.lap("bootstrap");
    let rotation = stage("rotation", rotation_stage(cfg, &boot, &history.u, &history.omega, &plan))?;
    clock.lap("rotation");
    let monitor = stage("monitor", monitor_stage(cfg, &history.u, &history.omega))?;
    clock.lap("monitor");

    let tol = &cfg.tolerances;
    let expansions = [&velocity.terms, &rotation.w1a, &rotation.w1b, &rotation.w1c];
    let checks = vec![
        criteria::identities(tol, cfg.seed),
        criteria::reconstruction(
            tol,
            &ReconstructionInputs {
                velocity: &velocity.reconstruction,
                rotation: &rotation.reconstruction,
                rotation_split: rotation.split_relative,
                expansions: &expansions,
            },
        ),
        criteria::morrey_oracle(tol),
        criteria::scaling(tol),
        criteria::holder(tol, cfg.seed),
        criteria::exponents(),
        criteria::solver(tol, Some(solver.max_div_ratio)),
        criteria::duhamel_checks(tol),
        criteria::theorem_shadow(&boot.hypothesis, &[&velocity.terms, &rotation.w1a]),
        criteria::monitor_slope(tol, &monitor.series),
    ];
    clock.lap("acceptance");

    // where the outputs go is not part of the result
    let mut config = cfg.clone();
    config.output = Default::default();
    let report = PipelineReport {
        config,
        solver,
        velocity,
        bootstrap: boot,
        rotation,
        monitor,
        acceptance: AcceptanceReport { checks },
    };
    let hash = report.hash()?;
    if let Some(dir) = &cfg.output.dir {
        stage("output", write_outputs(&report, &hash, &traj.diagnostics, &history, dir, cfg.output.save_state))?;
        clock.lap("output");
        stage(
            "output",
            std::fs::write(dir.join("timings.json"), serde_json::to_string_pretty(&clock.timings)?).map_err(Error::from),
        )?;
    }
    Ok(PipelineOutcome {
        report,
        hash,
        timings: clock.timings,
        history: options.keep_history.then_some(history),
    })
}

fn write_outputs(
    report: &PipelineReport,
    hash: &str,
    diagnostics: &[Diagnostics],
    history: &History,
    dir: &Path,
    save_state: bool,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), report.to_json()?)?;
    std::fs::write(dir.join("report.sha256"), format!("{hash}\n"))?;
    std::fs::write(dir.join("acceptance.txt"), report.acceptance.lines().join("\n") + "\n")?;
    std::fs::write(dir.join("terms.csv"), report.terms_csv())?;
    let mut diag = String::from(Diagnostics::CSV_HEADER);
    diag.push('\n');
    for d in diagnostics {
        diag.push_str(&d.csv_row());
        diag.push('\n');
    }
    std::fs::write(dir.join("diagnostics.csv"), diag)?;
    std::fs::write(dir.join("ckn.csv"), report.monitor.series.to_csv())?;
    if save_state {
        history.save_state(&dir.join("state.pmf1"))?;
    }
    emit_plots(&PlotBundle::from_report(report), &dir.join("plots"))
}
