//! Restoration planning for coupled power distribution and communication
//! networks.
//!
//! - [`netmodel`]: network entities, damage scenarios, validation.
//! - [`formulation`]: the restoration MILP, one builder per constraint family.
//! - [`planner`]: one-shot, sequential and iterative restoration strategies.
//! - [`verifier`]: solver-independent feasibility checks and a brute-force oracle.
//! - [`tooling`]: case files, plan files, generators and reports.

// Negated float comparisons are used to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
pub mod formulation;
mod grid;
pub mod netmodel;
pub mod planner;
pub mod tooling;
pub mod verifier;

pub use error::{FormulationError, GuardError, NetError, PlanError};
