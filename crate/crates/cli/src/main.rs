use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use morrey_micropolar::bootstrap::{bootstrap_chain, ckn_monitor, omega_window};
use morrey_micropolar::field::{pmf1, SpaceTimeField};
use morrey_micropolar::harness::{emit_plots, run_pipeline, ExperimentConfig, PipelineOptions, PipelineReport, PlotBundle};
use morrey_micropolar::localize::{
    decompose_u, decompose_w, expand_u1_terms, expand_w1a_terms, expand_w1b_terms, expand_w1c_terms, make_bumps,
    ExpansionOptions, FlowFields,
};
use morrey_micropolar::morrey::{morrey_norm, CylinderSamplingPlan, Event, MorreyParams};
use morrey_micropolar::riesz::{adams_hedberg_check, riesz_apply, RieszOrder};
use morrey_micropolar::scalar::decimal_rational;
use morrey_micropolar::solver::{simulate, Drives, History};

const THREADS_ENV: &str = "MORREY_MICROPOLAR_THREADS";

#[derive(Parser)]
#[command(name = "morrey-micropolar", version, about = "Morrey norms, Riesz potentials and a micropolar solver")]
struct Cli {
    /// Experiment configuration (JSON); built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configuration seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; MORREY_MICROPOLAR_THREADS takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for pipeline and report outputs.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    U,
    Omega,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured solver and write the (u, omega) history.
    Solve {
        #[arg(long)]
        out: PathBuf,
        /// Per-slice diagnostics as CSV.
        #[arg(long)]
        diag: Option<PathBuf>,
    },
    /// Morrey norm of a field file.
    MorreyNorm {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
    },
    /// Parabolic Riesz potential of a field file.
    Riesz {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Adams–Hedberg ratio and its spread over dyadic dilations.
    RieszCheck {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        a: f64,
    },
    /// Localized decomposition and term expansions of a state file.
    Decompose {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_enum)]
        side: Side,
        #[arg(long)]
        report: PathBuf,
    },
    /// Exponent bootstrap chain as JSON.
    Bootstrap {
        #[arg(long)]
        p0: f64,
        #[arg(long)]
        q0: f64,
    },
    /// Scaled local energy on shrinking cylinders as CSV.
    Ckn {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        t0: f64,
        #[arg(long, value_delimiter = ',', num_args = 3)]
        x0: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        radii: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full pipeline; exit code 0 iff every acceptance check passes.
    Pipeline,
    /// Re-emit plots and acceptance lines from a stored report.
    Report {
        #[arg(long)]
        report: PathBuf,
    },
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v.trim().parse().with_context(|| format!("{THREADS_ENV}={v} is not a count"))?;
            Ok(Some(n))
        }
        Err(_) => Ok(flag),
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &cli.out_dir {
        cfg.output.dir = Some(dir.clone());
    }
    Ok(cfg)
}

fn load_field(path: &Path) -> Result<SpaceTimeField> {
    pmf1::load(path).with_context(|| format!("reading {}", path.display()))
}

fn plan_for(cfg: &ExperimentConfig, f: &SpaceTimeField) -> CylinderSamplingPlan {
    cfg.plan.unwrap_or_else(|| CylinderSamplingPlan::default_for(f.grid()))
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn exact(v: f64) -> Result<morrey_micropolar::Exact> {
    decimal_rational(v).with_context(|| format!("{v} is not a finite exponent"))
}

fn decompose(cfg: &ExperimentConfig, state: &Path, side: Side, report: &Path) -> Result<()> {
    let (u, omega) = History::from_state_field(&load_field(state)?)?;
    let e = &cfg.exponents;
    let value = match side {
        Side::U => {
            let mut solver = cfg.effective_solver();
            solver.grid = *u.grid();
            let drives = Drives::from_config(&solver)?;
            let (a, f) = (drives.a_history(u.grid()), drives.f_history(u.grid()));
            let bumps = make_bumps(&cfg.velocity_cylinders, cfg.cutoff_order)?;
            let sigma = morrey_micropolar::bootstrap::sigma(&exact(e.p0)?, &exact(e.q0)?);
            let params = MorreyParams::new(morrey_micropolar::scalar::ExponentScalar::to_f64_value(&sigma), e.q0)?;
            let options = ExpansionOptions {
                norm: Some((params, plan_for(cfg, &u))),
                keep_fields: false,
            };
            let flow = FlowFields {
                u: &u,
                omega: &omega,
                a: &a,
                f: &f,
            };
            serde_json::json!({
                "reconstruction": decompose_u(&u, &bumps)?.summary,
                "terms": expand_u1_terms(&flow, &bumps, &options)?,
            })
        }
        Side::Omega => {
            let bumps = make_bumps(&cfg.rotation_cylinders, cfg.cutoff_order)?;
            let d = decompose_w(&omega, &bumps)?;
            let options = ExpansionOptions {
                norm: Some((MorreyParams::new(e.omega_p, e.omega_q)?, plan_for(cfg, &omega))),
                keep_fields: false,
            };
            let plain = ExpansionOptions::default();
            serde_json::json!({
                "reconstruction": d.reconstruction,
                "split": d.split,
                "w1a": expand_w1a_terms(&u, &omega, &bumps, &options)?,
                "w1b": expand_w1b_terms(&u, &omega, &bumps, &plain)?,
                "w1c": expand_w1c_terms(&omega, &bumps, &plain)?,
            })
        }
    };
    fs::write(report, serde_json::to_string_pretty(&value)?)?;
    Ok(())
}

fn print_acceptance(report: &PipelineReport) -> ExitCode {
    for line in report.acceptance.lines() {
        println!("{line}");
    }
    if report.acceptance.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn execute(cli: &Cli) -> Result<ExitCode> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Solve { out, diag } => {
            let traj = simulate(&cfg.effective_solver())?;
            let history = traj.history.as_ref().context("the solver horizon is zero")?;
            history.save_state(out)?;
            if let Some(path) = diag {
                traj.save_diagnostics(path)?;
            }
            eprintln!("{} steps of {:.3e}, max div ratio {:.2e}", traj.steps, traj.dt, traj.max_div_ratio);
        }
        Command::MorreyNorm { field, p, q } => {
            let f = load_field(field)?;
            print_json(&morrey_norm(&f, MorreyParams::new(*p, *q)?, &plan_for(&cfg, &f))?)?;
        }
        Command::Riesz { field, a, out } => {
            let f = load_field(field)?;
            pmf1::save(&riesz_apply(&f, RieszOrder::new(*a)?)?, out)?;
        }
        Command::RieszCheck { field, p, q, a } => {
            let f = load_field(field)?;
            print_json(&adams_hedberg_check(&f, *p, *q, *a, &plan_for(&cfg, &f))?)?;
        }
        Command::Decompose { state, side, report } => decompose(&cfg, state, *side, report)?,
        Command::Bootstrap { p0, q0 } => {
            let chain = bootstrap_chain(exact(*p0)?, exact(*q0)?)?;
            let window = omega_window(exact(*q0)?)?;
            print_json(&serde_json::json!({
                "p0": p0,
                "q0": q0,
                "steps": chain.len(),
                "chain": chain.states.iter().map(|s| s.p.to_string()).collect::<Vec<_>>(),
                "chain_f64": chain.exponents_f64(),
                "nu": chain.states[0].nu.to_string(),
                "omega_window": {
                    "q1": window.q1.to_string(),
                    "i1": { "nu": window.i1.nu.to_string(), "target": window.i1.target.to_string() },
                    "i2": { "nu": window.i2.nu.to_string(), "target": window.i2.target.to_string() },
                },
            }))?;
        }
        Command::Ckn {
            state,
            t0,
            x0,
            radii,
            out,
        } => {
            let (u, omega) = History::from_state_field(&load_field(state)?)?;
            let center = Event {
                t: *t0,
                x: [x0[0], x0[1], x0[2]],
            };
            let series = ckn_monitor(&u, &omega, center, radii)?;
            let mut csv = series.to_csv();
            if let Some(s) = series.slope {
                csv = format!("# log-log slope {s}\n{csv}");
            }
            match out {
                Some(path) => fs::write(path, csv)?,
                None => print!("{csv}"),
            }
        }
        Command::Pipeline => {
            let mut cfg = cfg;
            if cfg.output.dir.is_none() {
                cfg.output.dir = Some(PathBuf::from("pipeline-out"));
            }
            let outcome = run_pipeline(
                &cfg,
                PipelineOptions {
                    verbose: true,
                    keep_history: false,
                },
            )?;
            eprintln!("report hash {}", outcome.hash);
            return Ok(print_acceptance(&outcome.report));
        }
        Command::Report { report } => {
            let rep = PipelineReport::load(report)?;
            let dir = match &cli.out_dir {
                Some(d) => d.join("plots"),
                None => report.parent().unwrap_or(Path::new(".")).join("plots"),
            };
            emit_plots(&PlotBundle::from_report(&rep), &dir)?;
            eprintln!("plots written to {}", dir.display());
            return Ok(print_acceptance(&rep));
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// The error chain, skipping causes the library already spelled out in the
/// message above them.
fn render(e: &anyhow::Error) -> String {
    let mut parts: Vec<String> = Vec::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !parts.last().is_some_and(|prev| prev.contains(&text)) {
            parts.push(text);
        }
    }
    parts.join(": ")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = thread_count(cli.threads).and_then(|threads| {
        if let Some(n) = threads {
            if n == 0 {
                bail!("thread count must be positive");
            }
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
        }
        execute(&cli)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", render(&e));
            ExitCode::from(2)
        }
    }
}
