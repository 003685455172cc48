//! Localized decompositions of the velocity and micro-rotation, and their
//! Duhamel term expansions.

pub mod bumps;
pub mod cutoff;
pub mod duhamel;
pub mod identities;
pub mod inputs;
pub mod modulated;
pub mod passes;
pub mod report;
pub mod u_side;
pub mod w_side;

pub use bumps::{make_bumps, BumpFamily, NestedCylinders, DEFAULT_ORDER};
pub use cutoff::{Cutoff, CutoffSampler, Deriv, Smoothstep};
pub use duhamel::{duhamel, phi_weights, DuhamelStepper};
pub use identities::{verify_convective_identity, verify_rot_identity};
pub use inputs::FlowFields;
pub use modulated::Modulated;
pub use report::{ExpansionOptions, ExpansionReport, IdentityResidual, TermReport};
pub use u_side::{
    assemble_r, decompose_u, evolution_residual, expand_u1_terms, EvolutionResidual, RGroup, ReconstructionSummary,
    UDecomposition,
};
pub use w_side::{
    check_omega_window, convective_q1, decompose_w, expand_w1a_terms, expand_w1b_terms, expand_w1c_terms,
    WDecomposition,
};
