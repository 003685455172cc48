//! Pseudo-spectral integrator for the perturbed micropolar system on a
//! periodic box, with energy and solenoidality diagnostics.

pub mod config;
pub mod interpolation;
pub mod run;
pub mod step;

pub use config::{taylor_green, DriveRecipe, FieldRecipe, InitialData, SolverConfig, TermToggles};
pub use interpolation::interpolation_check;
pub use run::{run, simulate, Drives, History, Trajectory};
pub use step::{apply_linear, step, Diagnostics, SolverState, Supplier};
