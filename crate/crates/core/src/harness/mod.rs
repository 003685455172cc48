//! Experiment configuration, the end-to-end pipeline and the acceptance
//! report.

pub mod config;
pub mod criteria;
pub mod pipeline;
pub mod plots;
pub mod report;

pub use config::{ExperimentConfig, Exponents, MonitorConfig, OutputConfig, Tolerances};
pub use pipeline::{
    refinement_plans, run_pipeline, BootstrapStage, MonitorStage, PipelineOptions, PipelineOutcome, PipelineReport,
    RefinementPoint, RotationStage, SolverSummary, StageTiming, VelocityStage,
};
pub use plots::{emit_plots, Plot, PlotBundle};
pub use report::{AcceptanceReport, Bound, Check, Measurement, CRITERIA};
