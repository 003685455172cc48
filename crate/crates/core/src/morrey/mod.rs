//! Parabolic Morrey spaces: quasi-distance, cylinders, the norm estimator and
//! empirical checks of the Hölder and localization inequalities.

pub mod checks;
pub mod geometry;
pub mod norm;
pub mod plan;
pub mod rescale;
pub mod sums;

pub use checks::{check_holder, check_localization, Ratio, RatioReport};
pub use geometry::{quasi_distance, Cylinder, Event, ParabolicCylinder};
pub use norm::{lebesgue_norm, morrey_norm, normalized_functional, MorreyParams, NormEstimate};
pub use plan::{CylinderSamplingPlan, PlanSummary};
pub use rescale::{parabolic_rescale, parabolic_rescale_resampled};
