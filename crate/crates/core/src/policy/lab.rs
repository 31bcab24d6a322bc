use rayon::prelude::*;
use serde::Serialize;

use super::PolicyId;
use crate::engine::RunResult;
use crate::error::Result;
use crate::model::ModelParameters;
use crate::scenario::Scenario;
use crate::validation::{classify, peak_time, Finding};

/// The year the capacity target was meant to be reached.
pub const TARGET_YEAR: f64 = 2021.0;
/// Slack on event years read off the reference trajectories.
pub const TIMING_TOLERANCE: f64 = 3.0;
/// Reference years of the budget peak, first debt and capacity peak.
pub const BUDGET_PEAK_YEAR: f64 = 2020.0;
pub const DEBT_ONSET_YEAR: f64 = 2024.0;
pub const CAPACITY_PEAK_YEAR: f64 = 2030.0;

/// End-of-horizon values of one scenario, with the full run attached.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub scenario: String,
    pub policy: PolicyId,
    /// MW.
    pub installed_capacity: f64,
    pub penetration_rate: f64,
    pub tendency_to_invest: f64,
    /// Thousand dollars.
    pub suna_debt: f64,
    /// Years.
    pub delay_in_debt_payment: f64,
    /// MW; the scenario's capacity target.
    #[serde(skip)]
    pub capacity_target: f64,
    #[serde(skip)]
    pub result: RunResult,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    /// First row run under `policy`.
    pub fn by_policy(&self, policy: PolicyId) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.policy == policy)
    }

    pub fn by_name(&self, name: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.scenario == name)
    }
}

/// Columns of the comparison table, in order.
pub const REPORT_VARIABLES: [&str; 5] = [
    "installed_capacity",
    "penetration_rate",
    "tendency_to_invest",
    "suna_debt",
    "delay_in_debt_payment",
];

fn row(scenario: &Scenario, capacity_target: f64, result: RunResult) -> ComparisonRow {
    let last = |name: &str| result.final_value(name).unwrap_or(f64::NAN);
    ComparisonRow {
        scenario: scenario.name.clone(),
        policy: scenario.control.policy,
        installed_capacity: last("installed_capacity"),
        penetration_rate: last("penetration_rate"),
        tendency_to_invest: last("tendency_to_invest"),
        suna_debt: last("suna_debt"),
        delay_in_debt_payment: last("delay_in_debt_payment"),
        capacity_target,
        result,
    }
}

/// Runs every scenario (in parallel) and reports them in input order.
/// The first failure is returned, tagged with its scenario name.
pub fn run_scenario_suite(
    base: &ModelParameters,
    scenarios: &[Scenario],
) -> Result<ComparisonReport> {
    let results: Vec<Result<ComparisonRow>> = scenarios
        .par_iter()
        .map(|s| {
            let result = s.run(base)?;
            let target = s.parameters(base)?.economics.capacity_target;
            Ok(row(s, target, result))
        })
        .collect();
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport { rows })
}

fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] > w[1])
}

fn missing(name: &str, policies: &[PolicyId]) -> Finding {
    let names: Vec<&str> = policies.iter().map(PolicyId::as_str).collect();
    Finding::new(
        name,
        false,
        format!("report lacks a scenario for {}", names.join(", ")),
    )
}

/// Shape of a base run: budget rise and fall, debt emergence, and the
/// capacity growth, peak and decline.
pub fn base_behavior_findings(result: &RunResult) -> Vec<Finding> {
    let times = result.times();
    let get = |name: &str| result.series(name).unwrap_or(&[]);
    let (budget, debt, capacity) = (get("budget"), get("suna_debt"), get("installed_capacity"));
    if budget.is_empty() || debt.is_empty() || capacity.is_empty() {
        return vec![Finding::new(
            "c_base_behavior",
            false,
            "run lacks budget, debt or capacity",
        )];
    }
    let mut findings = Vec::new();
    let end = times[times.len() - 1];

    let budget_peak = peak_time(times, budget).unwrap_or(f64::NAN);
    let budget_max = budget.iter().cloned().fold(f64::MIN, f64::max);
    let budget_end = budget[budget.len() - 1];
    findings.push(Finding::new(
        "c_budget_rises_then_falls",
        budget_peak > times[0]
            && (budget_peak - BUDGET_PEAK_YEAR).abs() <= TIMING_TOLERANCE
            && budget_end < 0.5 * budget_max,
        format!("budget peaks at {budget_max:.4e} in {budget_peak}, ends at {budget_end:.4e}"),
    ));

    let onset = classify(times, debt).onset;
    findings.push(Finding::new(
        "c_debt_emerges_after_target_year",
        onset.is_some_and(|t| t > TARGET_YEAR && t <= DEBT_ONSET_YEAR + TIMING_TOLERANCE),
        format!("first debt at {onset:?}"),
    ));
    let debt_end = debt[debt.len() - 1];
    findings.push(Finding::new(
        "c_debt_exceeds_budget_at_end",
        debt_end > budget_end,
        format!("at {end}: debt {debt_end:.4e}, budget {budget_end:.4e}"),
    ));

    let at_target = result
        .value_at("installed_capacity", TARGET_YEAR)
        .unwrap_or(f64::NAN);
    let upto = times.iter().take_while(|&&t| t <= TARGET_YEAR).count();
    let growing = capacity[..upto].windows(2).all(|w| w[1] >= w[0]) && at_target > capacity[0];
    findings.push(Finding::new(
        "c_capacity_grows_through_target_year",
        growing,
        format!(
            "installed capacity {:.1} -> {at_target:.1} MW by {TARGET_YEAR}",
            capacity[0]
        ),
    ));

    let signature = classify(times, capacity);
    let peak = peak_time(times, capacity).unwrap_or(f64::NAN);
    let peak_value = capacity.iter().cloned().fold(f64::MIN, f64::max);
    let cap_end = capacity[capacity.len() - 1];
    findings.push(Finding::new(
        "c_capacity_peaks_then_declines",
        signature.local_maxima == 1
            && (peak - CAPACITY_PEAK_YEAR).abs() <= TIMING_TOLERANCE
            && cap_end < 0.95 * peak_value,
        format!(
            "{} local maxima, peak {peak_value:.1} MW in {peak}, {cap_end:.1} MW at {end}",
            signature.local_maxima
        ),
    ));
    findings
}

/// Orderings and shapes the four canonical policies are expected to show.
///
/// Scenarios are looked up by policy; a missing policy fails the findings
/// that need it.
pub fn qualitative_checks(report: &ComparisonReport) -> Vec<Finding> {
    use PolicyId::*;
    let mut findings = Vec::new();
    let (base, p1, p2, p3) = (
        report.by_policy(Base),
        report.by_policy(P1HigherFit),
        report.by_policy(P2BudgetAdjustedFit),
        report.by_policy(P3BudgetAdjustedTax),
    );

    match (base, p1, p2, p3) {
        (Some(b), Some(p1), Some(p2), Some(p3)) => {
            let caps = [
                p3.installed_capacity,
                b.installed_capacity,
                p2.installed_capacity,
                p1.installed_capacity,
            ];
            findings.push(Finding::new(
                "a_capacity_ordering",
                strictly_decreasing(&caps),
                format!(
                    "p3 {:.1} > base {:.1} > p2 {:.1} > p1 {:.1} MW",
                    caps[0], caps[1], caps[2], caps[3]
                ),
            ));
            let p3_debt_free = p3
                .result
                .series("suna_debt")
                .is_some_and(|d| d.iter().all(|&v| v == 0.0));
            let ordered = p1.suna_debt > b.suna_debt
                && b.suna_debt > p2.suna_debt
                && p2.suna_debt >= p3.suna_debt;
            findings.push(Finding::new(
                "b_debt_ordering",
                ordered && p3_debt_free,
                format!(
                    "p1 {:.4e} > base {:.4e} > p2 {:.4e} >= p3 {:.4e}; p3 debt-free throughout: {p3_debt_free}",
                    p1.suna_debt, b.suna_debt, p2.suna_debt, p3.suna_debt
                ),
            ));
        }
        _ => {
            findings.push(missing(
                "a_capacity_ordering",
                &[Base, P1HigherFit, P2BudgetAdjustedFit, P3BudgetAdjustedTax],
            ));
            findings.push(missing(
                "b_debt_ordering",
                &[Base, P1HigherFit, P2BudgetAdjustedFit, P3BudgetAdjustedTax],
            ));
        }
    }

    match base {
        Some(b) => findings.extend(base_behavior_findings(&b.result)),
        None => findings.push(missing("c_base_behavior", &[Base])),
    }

    match (base, p1) {
        (Some(b), Some(p1)) => {
            let target = |r: &ComparisonRow| {
                let s = r.result.series("installed_capacity")?;
                s.iter()
                    .position(|&v| v >= r.capacity_target)
                    .map(|i| r.result.times()[i])
            };
            let (t1, tb) = (target(p1), target(b));
            let passed = match (t1, tb) {
                (Some(a), Some(b)) => a <= b,
                (Some(_), None) => true,
                _ => false,
            };
            findings.push(Finding::new(
                "d_p1_reaches_target_first",
                passed,
                format!("target reached: p1 {t1:?}, base {tb:?}"),
            ));
        }
        _ => findings.push(missing("d_p1_reaches_target_first", &[Base, P1HigherFit])),
    }

    match p2 {
        Some(p2) => {
            let tendency = p2.result.series("tendency_to_invest").unwrap_or(&[]);
            let passed;
            let detail;
            if tendency.len() < 3 {
                passed = false;
                detail = "run too short".to_string();
            } else {
                let (i, trough) =
                    tendency
                        .iter()
                        .enumerate()
                        .fold(
                            (0, f64::INFINITY),
                            |m, (i, &v)| if v < m.1 { (i, v) } else { m },
                        );
                let (start, end) = (tendency[0], tendency[tendency.len() - 1]);
                passed = i > 0
                    && i + 1 < tendency.len()
                    && trough < start
                    && end > trough + 0.05 * (start - trough);
                detail = format!(
                    "tendency {start:.3} at start, trough {trough:.3} in {}, {end:.3} at the end",
                    p2.result.times()[i]
                );
            }
            findings.push(Finding::new("e_p2_tendency_recovers", passed, detail));
        }
        None => findings.push(missing("e_p2_tendency_recovers", &[P2BudgetAdjustedFit])),
    }

    match (p1, p3) {
        (Some(p1), Some(p3)) => {
            let ends = |r: &ComparisonRow| {
                let s = r.result.series("tendency_to_invest").unwrap_or(&[f64::NAN]);
                (s[0], s[s.len() - 1])
            };
            let ((p1_start, p1_end), (p3_start, p3_end)) = (ends(p1), ends(p3));
            findings.push(Finding::new(
                "f_tendency_extremes",
                p3_end > p3_start && p1_end < 0.1 * p1_start,
                format!("p3 tendency {p3_start:.3} -> {p3_end:.3}; p1 tendency {p1_start:.3} -> {p1_end:.3e}"),
            ));
        }
        _ => findings.push(missing(
            "f_tendency_extremes",
            &[P1HigherFit, P3BudgetAdjustedTax],
        )),
    }
    findings
}
