mod control;
mod lab;

pub use control::{
    apply_policy, PolicyControl, PolicyId, PolicyOverrides, PriceDeltaUnit, MAX_TAX_CAP,
};
pub use lab::{
    base_behavior_findings, qualitative_checks, run_scenario_suite, ComparisonReport,
    ComparisonRow, BUDGET_PEAK_YEAR, CAPACITY_PEAK_YEAR, DEBT_ONSET_YEAR, REPORT_VARIABLES,
    TARGET_YEAR, TIMING_TOLERANCE,
};
