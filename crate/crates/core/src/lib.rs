//! Design engine for two-arm group-sequential trials with a binary endpoint
//! and a non-inferiority hypothesis.
//!
//! The crate solves critical values together with the sample size or the
//! power under power-family error spending, evaluates crossing probabilities
//! and minimum observed differences, scans interim timing against spending
//! aggressiveness, and checks analytic results against a patient-level
//! simulator.

pub mod design;
pub mod error;
pub mod model;
pub mod mvn;
pub mod oc;
pub mod sim;
pub mod solver;
pub mod spending;

pub use design::{
    grid_scan, meet_targets, select_feasible, single_stage_n, solve_design, solve_design_best, DesignSpec, GridRow,
    GridSpec, Mode, SolvedDesign, TargetSearch, Targets,
};
pub use error::{Error, Result};
pub use model::{
    information, mean_z, BoundarySet, EfficacyModel, Hypothesis, LookSchedule, OperatingCharacteristics,
    SpendingPlan,
};
pub use mvn::{joint_law, mc_rect_prob, norm_cdf, norm_quantile, norm_sf, rect_prob, JointLaw, McEstimate, Rectangle};
pub use oc::{evaluate, Design, FutilityStops};
pub use spending::{spend_alpha, spend_beta, targets, SpendTargets};
