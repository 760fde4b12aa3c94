//! Case and plan files, benchmark and fuzz generators, and reports.

mod case;
mod feeders;
mod fuzz;
mod plan;
mod report;

pub use case::{
    emit_case, parse_case, Case, CaseError, Diagnostic, CASE_FORMAT_VERSION, DEFAULT_DELAY_CAP_MS,
    DEFAULT_GAP, DEFAULT_REQUIRED_MBPS,
};
pub use feeders::{
    gen_feeder123, gen_feeder33, measure_ordering, search_ordering_seed, DamageProfile, Ordering,
    SevereParams, FEEDER33_SEVERE_SEED,
};
pub use fuzz::{fuzz_case, FUZZ_V_REF_KV};
pub use plan::{emit_plan, parse_plan, PLAN_FORMAT_VERSION};
pub use report::{comparison_report, emit_report, Failure, Report, ReportRow, REPORT_HEADER};
