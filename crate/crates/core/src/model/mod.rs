//! Domain types shared by the estimator, the generators and the evaluation harness.

mod config;
mod groups;
mod matrix;

pub use config::{
    EstimateResult, ExperimentRecord, LipschitzMode, PenaltyKind, SolverConfig, StepRule, StopRule,
};
pub use groups::GroupAssignment;
pub use matrix::{SymMatrix, SYMMETRY_TOLERANCE};
