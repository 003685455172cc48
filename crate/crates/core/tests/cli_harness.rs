use morrey_micropolar::harness::{
    emit_plots, refinement_plans, run_pipeline, ExperimentConfig, PipelineOptions, PipelineReport, PlotBundle,
};
use morrey_micropolar::morrey::CylinderSamplingPlan;
use morrey_micropolar::solver::{DriveRecipe, FieldRecipe};
use morrey_micropolar::Error;

fn small() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.solver.grid.nx = 16;
    cfg.solver.grid.nt = 33;
    cfg.refinement_levels = 2;
    cfg
}

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("mm-harness-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn config_stage(e: &Error) -> bool {
    matches!(e, Error::Stage { stage, .. } if stage == "config")
}

#[test]
fn unknown_keys_are_rejected() {
    assert!(ExperimentConfig::from_json(r#"{"seed": 1, "grdi": {}}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"tolerances": {"identiy": 1e-8}}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"solver": {"initial": {"u": {"kind": "zero", "x": 1}}}}"#).is_err());
}

#[test]
fn broken_nesting_fails_before_any_compute() {
    let mut cfg = small();
    std::mem::swap(&mut cfg.velocity_cylinders.outer, &mut cfg.velocity_cylinders.inner);
    let e = run_pipeline(&cfg, PipelineOptions::default()).err().expect("rejected");
    assert!(config_stage(&e), "{e}");

    let mut cfg = small();
    cfg.rotation_cylinders.outer = cfg.velocity_cylinders.mid;
    let e = run_pipeline(&cfg, PipelineOptions::default()).err().expect("rejected");
    assert!(config_stage(&e), "{e}");

    let mut cfg = small();
    cfg.monitor.radii = vec![5.0];
    assert!(config_stage(&run_pipeline(&cfg, PipelineOptions::default()).err().unwrap()));
}

#[test]
fn refinement_plans_run_coarse_to_fine() {
    let cfg = small();
    let grid = cfg.solver.grid;
    let plan = CylinderSamplingPlan::default_for(&grid);
    let plans = refinement_plans(&plan, 3, &grid);
    assert_eq!(plans.last(), Some(&plan));
    for w in plans.windows(2) {
        assert!(w[0].r_min > w[1].r_min && w[0].stride_x > w[1].stride_x);
    }
}

#[test]
fn zero_data_gives_zero_norms() {
    let mut cfg = small();
    cfg.solver.initial.u = FieldRecipe::Zero {};
    cfg.solver.initial.omega = FieldRecipe::Zero {};
    cfg.solver.perturbation = DriveRecipe::Zero {};
    cfg.solver.force = DriveRecipe::Zero {};
    let out = run_pipeline(&cfg, PipelineOptions::default()).unwrap();
    let r = &out.report;
    let h = &r.bootstrap.hypothesis;
    assert_eq!(h.hypothesis_norm, 0.0);
    assert_eq!(h.velocity_conclusion, 0.0);
    assert_eq!(h.rotation_conclusion, 0.0);
    assert!(r.bootstrap.refinement.iter().all(|p| p.norm == 0.0));
    assert_eq!(r.solver.last.total_energy(), 0.0);
    for e in r.expansions() {
        assert!(e.terms.iter().all(|t| t.morrey_norm.map_or(true, |n| n == 0.0)));
    }
    // checks that do not look at the simulated fields are unaffected
    for id in [1, 3, 4, 5, 6, 7, 8] {
        assert!(r.acceptance.check(id).unwrap().pass, "{}", r.acceptance.check(id).unwrap().line());
    }
    assert!(r.acceptance.check(9).unwrap().pass);
    // no energy, no slope
    assert!(!r.acceptance.check(10).unwrap().pass);
}

#[test]
fn reports_are_reproducible_across_thread_counts() {
    let cfg = small();
    let dir = scratch("repro");
    let mut with_output = cfg.clone();
    with_output.output.dir = Some(dir.clone());
    let first = run_pipeline(&with_output, PipelineOptions::default()).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let second = pool.install(|| run_pipeline(&cfg, PipelineOptions::default())).unwrap();
    assert_eq!(first.hash, second.hash);
    assert!(first.report.acceptance.is_complete());

    // the stored report hashes to the same digest
    let stored = std::fs::read_to_string(dir.join("report.sha256")).unwrap();
    assert_eq!(stored.trim(), first.hash);
    let loaded = PipelineReport::load(&dir.join("report.json")).unwrap();
    assert_eq!(loaded.hash().unwrap(), first.hash);
    for f in ["acceptance.txt", "terms.csv", "diagnostics.csv", "ckn.csv", "timings.json", "plots/manifest.json"] {
        assert!(dir.join(f).exists(), "{f} missing");
    }
    let lines = std::fs::read_to_string(dir.join("acceptance.txt")).unwrap();
    assert_eq!(lines.lines().count(), 10);

    // plots regenerate from the stored report alone
    let bundle = PlotBundle::from_report(&loaded);
    let chain = bundle.plots.iter().find(|p| p.name == "bootstrap_chain").unwrap();
    assert_eq!(chain.rows.len(), 22);
    assert!(chain.annotation.as_deref().unwrap().contains("29/30"));
    let ckn = bundle.plots.iter().find(|p| p.name == "ckn_series").unwrap();
    assert!(ckn.annotation.as_deref().unwrap().starts_with("log-log slope"));
    let again = dir.join("again");
    emit_plots(&bundle, &again).unwrap();
    assert_eq!(
        std::fs::read_to_string(again.join("bootstrap_chain.csv")).unwrap(),
        std::fs::read_to_string(dir.join("plots/bootstrap_chain.csv")).unwrap()
    );

    let mut reseeded = cfg.clone();
    reseeded.seed += 1;
    let third = run_pipeline(&reseeded, PipelineOptions::default()).unwrap();
    assert_ne!(third.hash, first.hash);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn missing_report_is_an_error() {
    assert!(PipelineReport::load(std::path::Path::new("/nonexistent/report.json")).is_err());
}
