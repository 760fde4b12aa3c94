//! HiGHS backend.

use std::time::Instant;

use highs::{HighsModelStatus, HighsSolutionStatus, RowProblem, Sense as HSense};

use crate::error::SolveError;
use crate::model::{Model, Sense};
use crate::solution::{Solution, SolveOptions, SolveStatus};
use crate::Solver;

/// Gaps below this are reported as [`SolveStatus::Optimal`].
const PROVEN_GAP: f64 = 1e-9;

#[derive(Debug, Clone, Default)]
pub struct HighsSolver {
    /// Worker threads handed to HiGHS; `None` keeps its default.
    pub threads: Option<u32>,
}

struct Run {
    status: HighsModelStatus,
    has_primal: bool,
    values: Vec<f64>,
    gap: f64,
}

impl HighsSolver {
    fn run(
        &self,
        model: &Model,
        opts: &SolveOptions,
        fixed: Option<&[f64]>,
        remaining: Option<f64>,
    ) -> Result<Run, SolveError> {
        let mut pb = RowProblem::default();
        let mut cost = vec![0.0; model.num_vars()];
        for &(v, c) in model.objective().terms() {
            cost[v.index()] += c;
        }
        let mut any_int = false;
        let cols: Vec<_> = model
            .vars()
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let integral = v.kind.is_integral();
                match (fixed, integral) {
                    (Some(vals), true) => pb.add_column(cost[j], vals[j]..=vals[j]),
                    _ => {
                        any_int |= integral;
                        pb.add_column_with_integrality(cost[j], v.lb..=v.ub, integral)
                    }
                }
            })
            .collect();
        for c in model.constraints() {
            let factors: Vec<_> = c
                .expr
                .terms()
                .iter()
                .map(|&(v, a)| (cols[v.index()], a))
                .collect();
            match c.sense {
                Sense::Le => pb.add_row(..=c.rhs, factors),
                Sense::Ge => pb.add_row(c.rhs.., factors),
                Sense::Eq => pb.add_row(c.rhs..=c.rhs, factors),
            }
        }
        let mut hm = pb
            .try_optimise(HSense::Maximise)
            .map_err(|s| SolveError::Backend(format!("{s:?}")))?;
        hm.make_quiet();
        hm.set_option("mip_rel_gap", opts.gap);
        hm.set_option("mip_feasibility_tolerance", opts.feasibility_tol * 0.1);
        hm.set_option("primal_feasibility_tolerance", opts.feasibility_tol * 0.1);
        if let Some(secs) = remaining {
            hm.set_option("time_limit", secs.max(0.0));
        }
        if let Some(t) = self.threads {
            hm.set_option("threads", t as i32);
        }
        let solved = hm
            .try_solve()
            .map_err(|s| SolveError::Backend(format!("{s:?}")))?;
        let status = solved.status();
        let has_primal = solved.primal_solution_status() == HighsSolutionStatus::Feasible;
        let values = if has_primal {
            solved.get_solution().columns().to_vec()
        } else {
            Vec::new()
        };
        let gap = if any_int { solved.mip_gap() } else { 0.0 };
        Ok(Run {
            status,
            has_primal,
            values,
            gap,
        })
    }
}

impl Solver for HighsSolver {
    fn name(&self) -> &'static str {
        "highs"
    }

    fn solve(&self, model: &Model, opts: &SolveOptions) -> Result<Solution, SolveError> {
        let start = Instant::now();
        let limit = opts.time_limit.map(|d| d.as_secs_f64());
        let run = self.run(model, opts, None, limit)?;
        let status = match run.status {
            HighsModelStatus::Optimal | HighsModelStatus::ModelEmpty => {
                if run.gap.is_finite() && run.gap > PROVEN_GAP {
                    SolveStatus::GapLimit
                } else {
                    SolveStatus::Optimal
                }
            }
            HighsModelStatus::Infeasible => SolveStatus::Infeasible,
            HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => {
                SolveStatus::Unbounded
            }
            HighsModelStatus::ReachedTimeLimit
            | HighsModelStatus::ReachedIterationLimit
            | HighsModelStatus::ReachedSolutionLimit
            | HighsModelStatus::ReachedInterrupt => SolveStatus::TimeLimit,
            other => return Err(SolveError::Backend(format!("HiGHS status {other:?}"))),
        };
        if !run.has_primal
            || !matches!(
                status,
                SolveStatus::Optimal | SolveStatus::GapLimit | SolveStatus::TimeLimit
            )
        {
            let status = if status.is_success() {
                SolveStatus::Infeasible
            } else {
                status
            };
            return Ok(Solution::without_incumbent(status, start.elapsed()));
        }

        let mut values = run.values;
        for (x, v) in values.iter_mut().zip(model.vars()) {
            if v.kind.is_integral() {
                *x = x.round();
            }
        }
        if opts.polish && model.num_integer_vars() > 0 {
            let remaining = limit.map(|l| (l - start.elapsed().as_secs_f64()).max(1.0));
            if let Ok(p) = self.run(model, opts, Some(&values), remaining) {
                if p.status == HighsModelStatus::Optimal && p.has_primal {
                    for ((x, v), &px) in values.iter_mut().zip(model.vars()).zip(&p.values) {
                        if !v.kind.is_integral() {
                            *x = px;
                        }
                    }
                }
            }
        }
        let objective_value = model.objective_value(&values);
        let gap = if status == SolveStatus::Optimal {
            run.gap.clamp(0.0, 1.0).min(opts.gap)
        } else {
            run.gap
        };
        Ok(Solution {
            status,
            objective_value,
            values,
            gap,
            wall_time: start.elapsed(),
        })
    }
}
