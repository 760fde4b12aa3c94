//! Exact depth-first branch-and-bound over the dense simplex.
//!
//! Meant for toy models only: it refuses models with more than
//! [`BB_INTEGER_LIMIT`] integer variables.

use std::time::Instant;

use crate::error::SolveError;
use crate::model::Model;
use crate::simplex::{solve_lp, LpOutcome};
use crate::solution::{Solution, SolveOptions, SolveStatus};
use crate::Solver;

pub const BB_INTEGER_LIMIT: usize = 40;

const INT_TOL: f64 = 1e-6;
const ABS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Default)]
pub struct BranchAndBound;

struct Node {
    lb: Vec<f64>,
    ub: Vec<f64>,
}

impl Solver for BranchAndBound {
    fn name(&self) -> &'static str {
        "branch-and-bound"
    }

    fn solve(&self, model: &Model, opts: &SolveOptions) -> Result<Solution, SolveError> {
        let n_int = model.num_integer_vars();
        if n_int > BB_INTEGER_LIMIT {
            return Err(SolveError::TooLarge {
                integer_vars: n_int,
                limit: BB_INTEGER_LIMIT,
            });
        }
        let start = Instant::now();
        let mut root = Node {
            lb: model.vars().iter().map(|v| v.lb).collect(),
            ub: model.vars().iter().map(|v| v.ub).collect(),
        };
        // Integral bounds on integer variables.
        for (j, v) in model.vars().iter().enumerate() {
            if v.kind.is_integral() {
                root.lb[j] = (root.lb[j] - INT_TOL).ceil();
                root.ub[j] = (root.ub[j] + INT_TOL).floor();
            }
        }

        let mut incumbent: Option<(Vec<f64>, f64)> = None;
        // Largest LP bound among nodes discarded only because of the gap slack.
        let mut slack_bound = f64::NEG_INFINITY;
        let mut stack = vec![root];
        let mut timed_out = false;
        let mut root_seen = false;

        while let Some(node) = stack.pop() {
            if let Some(limit) = opts.time_limit {
                if start.elapsed() >= limit {
                    timed_out = true;
                    stack.push(node);
                    break;
                }
            }
            let outcome = solve_lp(model, &node.lb, &node.ub);
            let (x, bound) = match outcome {
                LpOutcome::Infeasible => {
                    root_seen = true;
                    continue;
                }
                LpOutcome::Unbounded => {
                    if !root_seen {
                        return Ok(Solution::without_incumbent(
                            SolveStatus::Unbounded,
                            start.elapsed(),
                        ));
                    }
                    return Err(SolveError::Backend(
                        "unbounded relaxation below root".into(),
                    ));
                }
                LpOutcome::Optimal { x, objective } => (x, objective),
            };
            root_seen = true;
            if let Some((_, best)) = &incumbent {
                if bound <= best + ABS_TOL {
                    continue;
                }
                if bound <= best + opts.gap * best.abs().max(1.0) {
                    slack_bound = slack_bound.max(bound);
                    continue;
                }
            }
            // Most fractional integer variable.
            let mut branch = None;
            let mut frac_best = INT_TOL;
            for (j, v) in model.vars().iter().enumerate() {
                if v.kind.is_integral() {
                    let f = (x[j] - x[j].floor()).min(x[j].ceil() - x[j]);
                    if f > frac_best {
                        frac_best = f;
                        branch = Some(j);
                    }
                }
            }
            match branch {
                None => {
                    let mut sol = x;
                    for (j, v) in model.vars().iter().enumerate() {
                        if v.kind.is_integral() {
                            sol[j] = sol[j].round();
                        }
                    }
                    let obj = model.objective_value(&sol);
                    if incumbent.as_ref().is_none_or(|(_, b)| obj > *b) {
                        incumbent = Some((sol, obj));
                    }
                }
                Some(j) => {
                    let down = x[j].floor();
                    let mut lo = Node {
                        lb: node.lb.clone(),
                        ub: node.ub.clone(),
                    };
                    lo.ub[j] = down;
                    let mut hi = node;
                    hi.lb[j] = down + 1.0;
                    // Up-branch explored first.
                    stack.push(lo);
                    stack.push(hi);
                }
            }
        }

        let elapsed = start.elapsed();
        let Some((values, objective_value)) = incumbent else {
            let status = if timed_out {
                SolveStatus::TimeLimit
            } else {
                SolveStatus::Infeasible
            };
            return Ok(Solution::without_incumbent(status, elapsed));
        };
        let denom = objective_value.abs().max(1.0);
        let (status, gap) = if timed_out {
            (SolveStatus::TimeLimit, f64::INFINITY)
        } else if slack_bound > objective_value + ABS_TOL {
            (
                SolveStatus::GapLimit,
                (slack_bound - objective_value) / denom,
            )
        } else {
            (SolveStatus::Optimal, 0.0)
        };
        Ok(Solution {
            status,
            objective_value,
            values,
            gap,
            wall_time: elapsed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinExpr, Sense, VarKind};

    #[test]
    fn knapsack_picks_larger_item() {
        let mut m = Model::new();
        let a = m.binary("a").unwrap();
        let b = m.binary("b").unwrap();
        m.add_constraint(LinExpr::term(a, 1.0).with(b, 1.0), Sense::Le, 1.0, "cap")
            .unwrap();
        m.set_objective(LinExpr::term(a, 3.0).with(b, 2.0)).unwrap();
        let s = BranchAndBound.solve(&m, &SolveOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective_value - 3.0).abs() < 1e-9);
        assert!(s.is_one(a) && !s.is_one(b));
    }

    #[test]
    fn integer_bound() {
        let mut m = Model::new();
        let x = m.integer("x", 0.0, 100.0).unwrap();
        m.add_constraint(LinExpr::term(x, 1.0), Sense::Le, 3.0, "c")
            .unwrap();
        m.set_objective(LinExpr::term(x, 1.0)).unwrap();
        let s = BranchAndBound.solve(&m, &SolveOptions::default()).unwrap();
        assert_eq!(s.value(x), 3.0);
    }

    #[test]
    fn lp_integral_instance_matches_relaxation() {
        // Assignment-like: x1 + x2 <= 1, x1 + x3 <= 1 is totally unimodular.
        let mut m = Model::new();
        let xs: Vec<_> = (0..3).map(|i| m.binary(format!("x{i}")).unwrap()).collect();
        m.add_constraint(
            LinExpr::term(xs[0], 1.0).with(xs[1], 1.0),
            Sense::Le,
            1.0,
            "r",
        )
        .unwrap();
        m.add_constraint(
            LinExpr::term(xs[0], 1.0).with(xs[2], 1.0),
            Sense::Le,
            1.0,
            "r",
        )
        .unwrap();
        m.set_objective(LinExpr::term(xs[0], 3.0).with(xs[1], 2.0).with(xs[2], 2.0))
            .unwrap();
        let lb: Vec<f64> = m.vars().iter().map(|v| v.lb).collect();
        let ub: Vec<f64> = m.vars().iter().map(|v| v.ub).collect();
        let relax = match solve_lp(&m, &lb, &ub) {
            LpOutcome::Optimal { objective, .. } => objective,
            other => panic!("{other:?}"),
        };
        let s = BranchAndBound.solve(&m, &SolveOptions::default()).unwrap();
        assert!((s.objective_value - relax).abs() < 1e-9);
        assert!((relax - 4.0).abs() < 1e-9);
    }

    #[test]
    fn size_guard() {
        let mut m = Model::new();
        for i in 0..=BB_INTEGER_LIMIT {
            m.add_var(format!("x{i}"), VarKind::Binary, 0.0, 1.0)
                .unwrap();
        }
        let err = BranchAndBound
            .solve(&m, &SolveOptions::default())
            .unwrap_err();
        assert!(err.to_string().contains("use external backend"));
    }

    #[test]
    fn infeasible_integer_model() {
        let mut m = Model::new();
        let x = m.integer("x", 0.0, 10.0).unwrap();
        m.add_constraint(LinExpr::term(x, 2.0), Sense::Eq, 3.0, "odd")
            .unwrap();
        let s = BranchAndBound.solve(&m, &SolveOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
    }
}
