//! Space-time grids, sampled fields and the spectral calculus on them.

mod fft;
pub mod grid;
pub mod history;
pub mod ops;
pub mod pmf1;
pub mod random;
pub mod spectral;

pub use grid::Grid;
pub use history::{FieldHistory, FieldSummary, FrozenField, SpaceTimeField};
pub use ops::{
    curl, divergence, gradient, inverse_laplacian, is_divergence_free, laplacian, leray_project,
    max_divergence, MeanReport,
};
pub use spectral::{SpectralContext, SpectralSnapshot};

/// Heat semigroup applied to one slice. See [`SpectralSnapshot::heat_step`].
pub fn heat_step(v: &SpectralSnapshot, tau: f64, diffusivity: f64) -> crate::Result<SpectralSnapshot> {
    v.heat_step(tau, diffusivity)
}
