//! Sparse Gaussian graphical models with demographic-parity penalties.
//!
//! The estimator minimizes a graphical-lasso likelihood plus a penalty on the
//! imbalance between within-group and across-group edge weights, over PSD
//! matrices with bounded spectral norm. See [`solver::fista_solve`].
//!
//! Fairness here is dyadic demographic parity: the distribution of an edge
//! weight should not depend on whether its endpoints share a sensitive group.

// NaN must fail parameter checks, so they are written as `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datagen;
pub mod error;
pub mod eval;
pub mod fairness;
pub mod linalg;
pub mod model;
pub mod solver;

pub use error::{Error, Result};
pub use model::{
    EstimateResult, ExperimentRecord, GroupAssignment, LipschitzMode, PenaltyKind, SolverConfig,
    StepRule, StopRule, SymMatrix,
};
