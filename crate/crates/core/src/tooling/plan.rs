//! Plan files: a TOML rendering of [`RestorationPlan`] with a version tag.

use serde::{Deserialize, Serialize};

use super::case::{CaseError, Diagnostic};
use crate::planner::RestorationPlan;

pub const PLAN_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanDoc {
    format_version: u32,
    plan: RestorationPlan,
}

pub fn emit_plan(plan: &RestorationPlan) -> String {
    toml::to_string(&PlanDoc {
        format_version: PLAN_FORMAT_VERSION,
        plan: plan.clone(),
    })
    .expect("plans always serialize")
}

pub fn parse_plan(text: &str) -> Result<RestorationPlan, CaseError> {
    let doc: PlanDoc = toml::from_str(text).map_err(|e| {
        let start = e.span().map_or(0, |s| s.start).min(text.len());
        let before = &text[..start];
        CaseError::Syntax(Diagnostic {
            line: before.matches('\n').count() + 1,
            col: before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1,
            message: e.message().trim().to_string(),
        })
    })?;
    if doc.format_version != PLAN_FORMAT_VERSION {
        return Err(CaseError::Schema(vec![Diagnostic {
            line: 1,
            col: 1,
            message: format!(
                "unsupported plan format_version {} (expected {PLAN_FORMAT_VERSION})",
                doc.format_version
            ),
        }]));
    }
    Ok(doc.plan)
}
