use milp::{ModelError, SolveError};
use thiserror::Error;

use crate::netmodel::Issue;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("unknown bus id {0:?}")]
    UnknownBus(String),
    #[error("unknown node id {0:?}")]
    UnknownNode(String),
    #[error("invalid network: {}", .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Issue>),
}

#[derive(Debug, Error)]
pub enum FormulationError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0} must be built before {1}")]
    MissingPart(&'static str, &'static str),
    #[error(
        "epsilon {epsilon} lets the delay term outweigh a load increment (must be below {limit})"
    )]
    EpsilonTooLarge { epsilon: f64, limit: f64 },
    #[error("weighted load {0} of bus {1:?} is not a multiple of 1e-6; supply epsilon explicitly")]
    NotQuantized(f64, String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("stage {stage} has no feasible restoration ({status})")]
    Infeasible { stage: usize, status: String },
    #[error("max_stages must be at least 1")]
    NoStages,
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("instance exceeds oracle guard: {0}")]
pub struct GuardError(pub String);
