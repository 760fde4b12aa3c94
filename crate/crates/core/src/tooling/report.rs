//! Comparison reports: one row per stage and one total row per algorithm.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::planner::{ComparisonEntry, RestorationPlan};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub algorithm: String,
    /// Stage index, or `None` on the total row.
    pub stage: Option<usize>,
    pub kind: String,
    pub wall_ms: f64,
    pub comm_nodes: usize,
    pub comm_terminals: usize,
    pub energized_buses: usize,
    pub stage_pickup_kw: f64,
    pub cumulative_pickup_kw: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub algorithm: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub failures: Vec<Failure>,
}

fn rows_of(plan: &RestorationPlan, out: &mut Vec<ReportRow>) {
    let algo = plan.algorithm.to_string();
    for s in &plan.stages {
        out.push(ReportRow {
            algorithm: algo.clone(),
            stage: Some(s.index),
            kind: format!("{:?}", s.kind).to_lowercase(),
            wall_ms: s.stats.wall_ms,
            comm_nodes: s.communicating_nodes(),
            comm_terminals: s.communicating_terminals(),
            energized_buses: s.energized_buses.len(),
            stage_pickup_kw: s.stage_pickup_kw,
            cumulative_pickup_kw: s.cumulative_pickup_kw,
        });
    }
    let last = plan.stages.last();
    out.push(ReportRow {
        algorithm: algo,
        stage: None,
        kind: "total".into(),
        wall_ms: plan.wall_ms,
        comm_nodes: last.map_or(0, |s| s.communicating_nodes()),
        comm_terminals: last.map_or(0, |s| s.communicating_terminals()),
        energized_buses: last.map_or(0, |s| s.energized_buses.len()),
        stage_pickup_kw: plan.total_pickup_kw - plan.initial_pickup_kw,
        cumulative_pickup_kw: plan.total_pickup_kw,
    });
}

pub fn emit_report(plans: &[RestorationPlan]) -> Report {
    let mut rows = Vec::new();
    for p in plans {
        rows_of(p, &mut rows);
    }
    Report {
        rows,
        failures: Vec::new(),
    }
}

pub fn comparison_report(entries: &[ComparisonEntry]) -> Report {
    let mut report = Report::default();
    for e in entries {
        match (&e.plan, &e.error) {
            (Some(p), _) => rows_of(p, &mut report.rows),
            (None, err) => report.failures.push(Failure {
                algorithm: e.algorithm.to_string(),
                error: err.clone().unwrap_or_default(),
            }),
        }
    }
    report
}

pub const REPORT_HEADER: &str =
    "algorithm  stage  kind        wall_ms  comm_nodes  comm_terms  energized  stage_kw  cumulative_kw";

impl Report {
    pub fn to_text(&self) -> String {
        let mut s = String::from(REPORT_HEADER);
        s.push('\n');
        for r in &self.rows {
            let stage = r.stage.map_or("-".to_string(), |i| i.to_string());
            let _ = writeln!(
                s,
                "{:<9}  {:>5}  {:<10}  {:>7.1}  {:>10}  {:>10}  {:>9}  {:>8.1}  {:>13.1}",
                r.algorithm,
                stage,
                r.kind,
                r.wall_ms,
                r.comm_nodes,
                r.comm_terminals,
                r.energized_buses,
                r.stage_pickup_kw,
                r.cumulative_pickup_kw
            );
        }
        for f in &self.failures {
            let _ = writeln!(s, "{:<9}  failed: {}", f.algorithm, f.error);
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_header_only() {
        let r = emit_report(&[]);
        assert_eq!(r.to_text(), format!("{REPORT_HEADER}\n"));
    }

    #[test]
    fn json_round_trip() {
        let r = Report {
            rows: vec![ReportRow {
                algorithm: "ICLR".into(),
                stage: Some(1),
                kind: "integrated".into(),
                wall_ms: 12.5,
                comm_nodes: 7,
                comm_terminals: 4,
                energized_buses: 3,
                stage_pickup_kw: 90.0,
                cumulative_pickup_kw: 150.0,
            }],
            failures: vec![Failure {
                algorithm: "SCLR".into(),
                error: "infeasible".into(),
            }],
        };
        assert_eq!(Report::from_json(&r.to_json()).unwrap(), r);
    }
}
