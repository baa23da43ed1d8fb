//! Projections onto the intersection of an ℓ1 ball/sphere and the unit ℓ2
//! ball/sphere, together with the auxiliary functions and root finders
//! they rely on.
//!
//! All projections work on `|v|` and restore signs at the end.

pub mod aux;
pub mod profile;
pub mod project;
pub mod roots;

pub use aux::{
    clipped_norms, closed_form_root, phi, psi, psi_fun, psi_fun_deriv, psi_root, BreakpointStats,
};
pub use profile::{PiecewiseModel, Profile, SortedProfile};
pub use project::{
    project_p1, project_p2, project_p3, q_project, tie_solution, ConstraintSet, ProjectionCase,
    ProjectionOutcome, Projector, Radius, RootMethod, SetKind,
};
pub use roots::{
    bnw_unguarded, mbnw_profile, mbnw_root, qasb_profile, qasb_root, BnwReport, RootConfig,
    RootResult,
};
