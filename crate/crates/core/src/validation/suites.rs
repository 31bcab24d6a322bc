use serde::Serialize;

use super::behavior::{classify, BehaviorSignature};
use crate::engine::{run_simulation, RunResult, SimulationClock};
use crate::error::{Error, Result};
use crate::model::{FitModel, ModelParameters, STOCKS};
use crate::policy::{PolicyControl, PolicyId};

/// Initial debt of the financial-burden scenario, in thousand dollars.
pub const EXTREME_INITIAL_DEBT: f64 = 1e8;
/// Tendency below which investment counts as having stopped.
pub const NEAR_ZERO_TENDENCY: f64 = 0.01;
/// Years two debt onsets may differ by and still count as the same behavior.
pub const ONSET_TOLERANCE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The check was not applicable to this input and is not a failure.
    OutOfBand,
}

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl Finding {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: if passed { Status::Pass } else { Status::Fail },
            detail: detail.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// True when no finding failed.
pub fn all_passed(findings: &[Finding]) -> bool {
    findings.iter().all(Finding::passed)
}

fn run(
    params: ModelParameters,
    control: &PolicyControl,
    clock: &SimulationClock,
) -> Result<RunResult> {
    run_simulation(
        &mut FitModel::new(params, control.with_policy(PolicyId::Base)),
        clock,
    )
}

fn series<'a>(r: &'a RunResult, name: &str) -> Result<&'a [f64]> {
    r.series(name)
        .ok_or_else(|| Error::Config(format!("run has no variable `{name}`")))
}

fn at(r: &RunResult, name: &str, year: f64) -> Result<f64> {
    r.value_at(name, year)
        .ok_or_else(|| Error::Config(format!("run has no `{name}` at {year}")))
}

/// The two structural stress tests, run under the base policy.
///
/// (a) a one-year remuneration period: capacity must decline, investment
/// must stop and the budget must grow steadily once the first year is over.
/// (b) a large initial debt: the tendency to invest must fall from its
/// starting value to about zero and the budget must drop steeply at first.
pub fn extreme_condition_suite(
    base: &ModelParameters,
    control: &PolicyControl,
    clock: &SimulationClock,
) -> Result<Vec<Finding>> {
    let mut findings = Vec::new();
    let start = clock.start_year();

    let mut minimal = *base;
    minimal.economics.remuneration_period = 1.0;
    let a = run(minimal, control, clock)?;
    let cap = series(&a, "installed_capacity")?;
    let (cap0, cap1) = (cap[0], cap[cap.len() - 1]);
    findings.push(Finding::new(
        "minimal_support_capacity_declines",
        cap1 < cap0,
        format!("installed capacity {cap0:.1} -> {cap1:.1} MW"),
    ));
    let tendency = a.final_value("tendency_to_invest").unwrap_or(f64::NAN);
    findings.push(Finding::new(
        "minimal_support_no_tendency",
        tendency < NEAR_ZERO_TENDENCY,
        format!("final tendency to invest {tendency:.3e}"),
    ));
    let budget = series(&a, "budget")?;
    let first_year = ((1.0 / clock.dt()).round() as usize).min(budget.len() - 1);
    let monotone = budget[first_year..].windows(2).all(|w| w[1] >= w[0]);
    let (b0, b1) = (budget[0], budget[budget.len() - 1]);
    findings.push(Finding::new(
        "minimal_support_budget_grows",
        monotone && b1 > b0,
        format!("budget {b0:.4e} -> {b1:.4e}, non-decreasing after the first year: {monotone}"),
    ));

    let mut burdened = *base;
    burdened.initial.suna_debt = EXTREME_INITIAL_DEBT;
    let b = run(burdened, control, clock)?;
    let t0 = at(&b, "tendency_to_invest", start)?;
    let t3 = at(&b, "tendency_to_invest", start + 3.0)?;
    let t_end = b.final_value("tendency_to_invest").unwrap_or(f64::NAN);
    findings.push(Finding::new(
        "initial_debt_tendency_falls",
        t3 < t0 && t_end < NEAR_ZERO_TENDENCY,
        format!("tendency {t0:.3e} at start, {t3:.3e} after 3 years, {t_end:.3e} at the end"),
    ));
    let budget0 = at(&b, "budget", start)?;
    let budget1 = at(&b, "budget", start + 1.0)?;
    findings.push(Finding::new(
        "initial_debt_budget_drops",
        budget1 < 0.5 * budget0,
        format!("budget {budget0:.4e} -> {budget1:.4e} over the first year"),
    ));
    Ok(findings)
}

/// Relative parameter changes applied together.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationSet {
    /// `(parameter name, relative change)`; `0.7` means +70 %.
    pub changes: Vec<(String, f64)>,
}

impl PerturbationSet {
    pub fn new(changes: impl IntoIterator<Item = (impl Into<String>, f64)>) -> Self {
        Self {
            changes: changes.into_iter().map(|(n, c)| (n.into(), c)).collect(),
        }
    }

    /// Longer build time, lifetime and contracts, a cheaper tariff and a
    /// weaker learning effect, all at once.
    pub fn standard() -> Self {
        Self::new([
            ("time_to_build", 0.7),
            ("normal_equipment_lifetime", 0.3),
            ("remuneration_period", 0.2),
            ("initial_fit_price", -0.1),
            ("learning_exponent", -0.5),
        ])
    }

    pub fn apply(&self, base: &ModelParameters) -> Result<ModelParameters> {
        let mut p = *base;
        for (name, change) in &self.changes {
            let value = p.get(name)?;
            p.set(name, value * (1.0 + change))?;
        }
        Ok(p)
    }
}

/// Signatures of the base and perturbed runs and the resulting findings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityReport {
    pub base: Vec<(String, BehaviorSignature)>,
    pub perturbed: Vec<(String, BehaviorSignature)>,
    pub findings: Vec<Finding>,
}

/// Variables whose behavior must survive a perturbation.
pub const SENSITIVITY_VARIABLES: [&str; 2] = ["installed_capacity", "suna_debt"];

fn signatures(r: &RunResult) -> Result<Vec<(String, BehaviorSignature)>> {
    SENSITIVITY_VARIABLES
        .iter()
        .map(|name| Ok((name.to_string(), classify(r.times(), series(r, name)?))))
        .collect()
}

/// Why a perturbed parameter set is outside what a sensitivity test covers.
fn out_of_band(p: &ModelParameters, clock: &SimulationClock) -> Option<String> {
    if p.economics.remuneration_period <= 1.0 {
        return Some(format!(
            "remuneration period {} years is the minimal-support extreme case",
            p.economics.remuneration_period
        ));
    }
    p.validate(clock).err().map(|e| e.to_string())
}

/// Runs the base and perturbed parameter sets and compares behavior-mode
/// signatures of installed capacity and debt.
///
/// A perturbation that pushes a parameter to an extreme-condition value or
/// out of its valid range is reported as out of band, not as a failure.
pub fn sensitivity_suite(
    base: &ModelParameters,
    control: &PolicyControl,
    clock: &SimulationClock,
    perturbations: &PerturbationSet,
) -> Result<SensitivityReport> {
    let perturbed_params = perturbations.apply(base)?;
    let base_sigs = signatures(&run(*base, control, clock)?)?;

    if let Some(reason) = out_of_band(&perturbed_params, clock) {
        let findings = SENSITIVITY_VARIABLES
            .iter()
            .map(|name| Finding {
                name: format!("{name}_signature"),
                status: Status::OutOfBand,
                detail: reason.clone(),
            })
            .collect();
        return Ok(SensitivityReport {
            base: base_sigs,
            perturbed: Vec::new(),
            findings,
        });
    }

    let perturbed_sigs = signatures(&run(perturbed_params, control, clock)?)?;
    let findings = base_sigs
        .iter()
        .zip(&perturbed_sigs)
        .map(|((name, a), (_, b))| {
            Finding::new(
                format!("{name}_signature"),
                a.matches(b, ONSET_TOLERANCE),
                format!("base {a:?}, perturbed {b:?}"),
            )
        })
        .collect();
    Ok(SensitivityReport {
        base: base_sigs,
        perturbed: perturbed_sigs,
        findings,
    })
}

/// Largest step-halving difference a stock may show, relative to its peak magnitude.
pub const CONVERGENCE_TOLERANCE: f64 = 0.05;

/// Runs at the clock's step and at half of it and compares every stock at
/// the common record times. The error of a stock is the largest absolute
/// difference divided by its largest magnitude in the coarse run.
pub fn step_convergence(
    base: &ModelParameters,
    control: &PolicyControl,
    clock: &SimulationClock,
) -> Result<Vec<Finding>> {
    let fine_clock = clock.with_dt(clock.dt() / 2.0)?;
    let model = |c: &SimulationClock| run_simulation(&mut FitModel::new(*base, *control), c);
    let (coarse, fine) = (model(clock)?, model(&fine_clock)?);
    STOCKS
        .iter()
        .map(|&name| {
            let (a, b) = (series(&coarse, name)?, series(&fine, name)?);
            let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let diff = a
                .iter()
                .enumerate()
                .map(|(k, v)| (v - b[2 * k]).abs())
                .fold(0.0f64, f64::max);
            let error = if scale > 0.0 { diff / scale } else { diff };
            Ok(Finding::new(
                format!("{name}_converges"),
                error < CONVERGENCE_TOLERANCE,
                format!(
                    "max relative difference {error:.3e} between dt {} and {}",
                    clock.dt(),
                    fine_clock.dt()
                ),
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config;

    fn shipped() -> (ModelParameters, PolicyControl, SimulationClock) {
        let c = config::shipped();
        (c.parameters, c.control, c.clock)
    }

    #[test]
    fn zero_perturbation_keeps_every_signature() {
        let (p, c, clock) = shipped();
        let none = PerturbationSet::new([("time_to_build", 0.0), ("initial_fit_price", 0.0)]);
        let report = sensitivity_suite(&p, &c, &clock, &none).unwrap();
        assert_eq!(report.base, report.perturbed);
        assert_eq!(report.findings.len(), SENSITIVITY_VARIABLES.len());
        assert!(report.findings.iter().all(|f| f.status == Status::Pass));
    }

    #[test]
    fn one_year_remuneration_is_out_of_band() {
        let (p, c, clock) = shipped();
        let extreme = PerturbationSet::new([("remuneration_period", -0.96)]);
        let report = sensitivity_suite(&p, &c, &clock, &extreme).unwrap();
        assert!(report.perturbed.is_empty());
        assert!(report
            .findings
            .iter()
            .all(|f| f.status == Status::OutOfBand));
        assert!(all_passed(&report.findings));
    }

    #[test]
    fn invalid_perturbation_is_out_of_band() {
        let (p, c, clock) = shipped();
        let report = sensitivity_suite(
            &p,
            &c,
            &clock,
            &PerturbationSet::new([("capacity_factor", 5.0)]),
        )
        .unwrap();
        assert!(report
            .findings
            .iter()
            .all(|f| f.status == Status::OutOfBand));
    }

    #[test]
    fn unknown_parameter_is_an_error() {
        let (p, c, clock) = shipped();
        assert!(sensitivity_suite(
            &p,
            &c,
            &clock,
            &PerturbationSet::new([("warp_factor", 0.1)])
        )
        .is_err());
    }

    #[test]
    fn perturbations_compound_on_the_base_value() {
        let (p, _, _) = shipped();
        let q = PerturbationSet::standard().apply(&p).unwrap();
        assert_eq!(q.economics.time_to_build, p.economics.time_to_build * 1.7);
        assert_eq!(
            q.economics.learning_exponent,
            p.economics.learning_exponent * 0.5
        );
        assert_eq!(
            q.economics.initial_fit_price,
            p.economics.initial_fit_price * 0.9
        );
    }

    #[test]
    fn shipped_calibration_passes_the_extreme_suite() {
        let (p, c, clock) = shipped();
        let findings = extreme_condition_suite(&p, &c, &clock).unwrap();
        assert_eq!(findings.len(), 5);
        assert!(all_passed(&findings), "{findings:?}");
    }

    #[test]
    fn convergence_covers_every_stock() {
        let (p, c, clock) = shipped();
        let findings = step_convergence(&p, &c, &clock).unwrap();
        assert_eq!(findings.len(), STOCKS.len());
        for (f, stock) in findings.iter().zip(STOCKS) {
            assert_eq!(f.name, format!("{stock}_converges"));
        }
    }

    #[test]
    fn out_of_band_findings_count_as_passed() {
        let f = Finding {
            name: "x".into(),
            status: Status::OutOfBand,
            detail: String::new(),
        };
        assert!(f.passed());
        assert!(!all_passed(&[f, Finding::new("y", false, "")]));
    }
}
