//! Exponent bookkeeping of the integrability bootstrap, the theorem-shadow
//! norms on nested cylinders, and the local energy monitor.

pub mod chain;
pub mod ckn;
pub mod hypothesis;

pub use chain::{bootstrap_chain, exact_chain_length, omega_window, sigma, Chain, ExponentMap, ExponentState, OmegaWindow};
pub use ckn::{ball_transform, ckn_monitor, log_log_slope, EnergyMonitorSeries, MonitorEntry};
pub use hypothesis::{cylinder_lebesgue_norm, hypothesis_check, HypothesisReport, TheoremCylinders};
