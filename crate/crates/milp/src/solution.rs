use std::collections::BTreeMap;
use std::fmt;
use std::time::Duration;

use crate::model::{Model, VarId};

/// Outcome of a solve.
///
/// `Optimal` means the optimum was proven (zero remaining gap); `GapLimit`
/// means the search stopped once the relative gap fell below the configured
/// tolerance. Both carry a feasible assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    GapLimit,
    TimeLimit,
    Infeasible,
    Unbounded,
}

impl SolveStatus {
    pub fn is_success(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::GapLimit)
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::GapLimit => "gap_limit",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Relative optimality gap.
    pub gap: f64,
    pub time_limit: Option<Duration>,
    /// Absolute tolerance for constraint and integrality checks.
    pub feasibility_tol: f64,
    /// Re-solve the continuous part with integers fixed, so that equality
    /// rows hold to round-off instead of solver tolerance.
    pub polish: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            gap: 1e-4,
            time_limit: None,
            feasibility_tol: 1e-6,
            polish: true,
        }
    }
}

impl SolveOptions {
    pub fn with_gap(mut self, gap: f64) -> Self {
        self.gap = gap;
        self
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = Some(limit);
        self
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolveStatus,
    /// Objective of the returned assignment (NaN when there is none).
    pub objective_value: f64,
    /// Indexed by [`VarId::index`]; empty when no incumbent exists.
    pub values: Vec<f64>,
    pub gap: f64,
    pub wall_time: Duration,
}

impl Solution {
    pub fn without_incumbent(status: SolveStatus, wall_time: Duration) -> Self {
        Self {
            status,
            objective_value: f64::NAN,
            values: Vec::new(),
            gap: f64::INFINITY,
            wall_time,
        }
    }

    pub fn has_incumbent(&self) -> bool {
        !self.values.is_empty()
    }

    pub fn value(&self, var: VarId) -> f64 {
        self.values[var.index()]
    }

    /// Binary read-out: true when the value rounds to 1.
    pub fn is_one(&self, var: VarId) -> bool {
        self.values[var.index()] > 0.5
    }

    pub fn assignment(&self, model: &Model) -> BTreeMap<String, f64> {
        model
            .vars()
            .iter()
            .zip(&self.values)
            .map(|(v, &x)| (v.name.clone(), x))
            .collect()
    }
}
