use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest tax the tax controller may set, in dollars per kWh: the point
/// where social tolerance has collapsed.
pub const MAX_TAX_CAP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyId {
    Base,
    P1HigherFit,
    P2BudgetAdjustedFit,
    P3BudgetAdjustedTax,
}

impl PolicyId {
    pub const ALL: [PolicyId; 4] = [
        PolicyId::Base,
        PolicyId::P1HigherFit,
        PolicyId::P2BudgetAdjustedFit,
        PolicyId::P3BudgetAdjustedTax,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyId::Base => "base",
            PolicyId::P1HigherFit => "p1_higher_fit",
            PolicyId::P2BudgetAdjustedFit => "p2_budget_adjusted_fit",
            PolicyId::P3BudgetAdjustedTax => "p3_budget_adjusted_tax",
        }
    }
}

impl fmt::Display for PolicyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyId::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::UnknownPolicy(s.to_string()))
    }
}

/// Unit the tariff increment of the higher-tariff policy is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PriceDeltaUnit {
    #[default]
    UsdPerKwh,
    UsdPerMwh,
}

impl PriceDeltaUnit {
    pub fn as_str(&self) -> &'static str {
        match self {
            PriceDeltaUnit::UsdPerKwh => "usd_per_kwh",
            PriceDeltaUnit::UsdPerMwh => "usd_per_mwh",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "usd_per_kwh" => Ok(Self::UsdPerKwh),
            "usd_per_mwh" => Ok(Self::UsdPerMwh),
            other => Err(Error::invariant(
                "policy.fit_price_delta_unit",
                format!("expected usd_per_kwh or usd_per_mwh, got `{other}`"),
            )),
        }
    }

    /// Converts an increment in this unit to model tariff units
    /// (thousand dollars per MWh).
    pub fn to_model(&self, delta: f64) -> f64 {
        match self {
            PriceDeltaUnit::UsdPerKwh => delta,
            PriceDeltaUnit::UsdPerMwh => delta / 1000.0,
        }
    }
}

/// Controller settings for one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyControl {
    pub policy: PolicyId,
    /// Thousand dollars per MWh added to the tariff under the higher-tariff policy.
    pub fit_price_delta: f64,
    /// Strength of the tariff cut per unit of relative budget shortage.
    pub fit_controller_gain: f64,
    /// Dollars per kWh of tax per thousand dollars of perceived shortage.
    pub tax_controller_gain: f64,
    /// Dollars per kWh.
    pub tax_floor: f64,
    /// Dollars per kWh.
    pub tax_cap: f64,
    /// Years over which the budget shortage is perceived.
    pub shortage_smoothing_time: f64,
    /// Years of whole desired payment the budget is expected to cover.
    pub reserve_coverage: f64,
}

impl PolicyControl {
    /// Same settings, different policy.
    pub fn with_policy(&self, policy: PolicyId) -> Self {
        Self { policy, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("policy.fit_price_delta", self.fit_price_delta),
            ("policy.fit_controller_gain", self.fit_controller_gain),
            ("policy.tax_controller_gain", self.tax_controller_gain),
            ("policy.tax_floor", self.tax_floor),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::invariant(name, format!("must be >= 0, got {value}")));
            }
        }
        if !(self.tax_cap.is_finite() && self.tax_floor <= self.tax_cap) {
            return Err(Error::invariant(
                "policy.tax_cap",
                format!(
                    "tax_floor {} must not exceed tax_cap {}",
                    self.tax_floor, self.tax_cap
                ),
            ));
        }
        if self.tax_cap > MAX_TAX_CAP {
            return Err(Error::invariant(
                "policy.tax_cap",
                format!("must be <= {MAX_TAX_CAP} $/kWh, got {}", self.tax_cap),
            ));
        }
        if !(self.shortage_smoothing_time.is_finite() && self.shortage_smoothing_time > 0.0) {
            return Err(Error::invariant(
                "policy.shortage_smoothing_time",
                format!("must be > 0, got {}", self.shortage_smoothing_time),
            ));
        }
        if !(self.reserve_coverage.is_finite() && self.reserve_coverage >= 1.0) {
            return Err(Error::invariant(
                "policy.reserve_coverage",
                format!("must be >= 1, got {}", self.reserve_coverage),
            ));
        }
        Ok(())
    }
}

/// What a policy changes in one evaluation. The default changes nothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyOverrides {
    /// Thousand dollars per MWh added after the goal-gap rule.
    pub fit_price_delta: f64,
    /// Multiplies the goal-gap price; in (0, 1].
    pub fit_price_multiplier: f64,
    /// Replacement tax in dollars per kWh.
    pub res_tax: Option<f64>,
}

impl Default for PolicyOverrides {
    fn default() -> Self {
        Self {
            fit_price_delta: 0.0,
            fit_price_multiplier: 1.0,
            res_tax: None,
        }
    }
}

/// Maps the budget state to tariff and tax overrides.
///
/// `budget_signal` is the budget stock and `shortage_signal` the perceived
/// (smoothed) shortage, both in thousand dollars. `base_tax` is the unmodified tax.
pub fn apply_policy(
    control: &PolicyControl,
    base_tax: f64,
    budget_signal: f64,
    shortage_signal: f64,
    _t: f64,
) -> Result<PolicyOverrides> {
    for (name, value) in [
        ("budget_signal", budget_signal),
        ("shortage_signal", shortage_signal),
    ] {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::input(
                name,
                format!("must be finite and >= 0, got {value}"),
            ));
        }
    }
    let overrides = match control.policy {
        PolicyId::Base => PolicyOverrides::default(),
        PolicyId::P1HigherFit => PolicyOverrides {
            fit_price_delta: control.fit_price_delta,
            ..Default::default()
        },
        PolicyId::P2BudgetAdjustedFit => {
            let pressure = if shortage_signal > 0.0 {
                shortage_signal / (shortage_signal + budget_signal)
            } else {
                0.0
            };
            PolicyOverrides {
                fit_price_multiplier: 1.0 / (1.0 + control.fit_controller_gain * pressure),
                ..Default::default()
            }
        }
        PolicyId::P3BudgetAdjustedTax => {
            let tax = base_tax + control.tax_controller_gain * shortage_signal;
            PolicyOverrides {
                res_tax: Some(tax.clamp(control.tax_floor, control.tax_cap)),
                ..Default::default()
            }
        }
    };
    Ok(overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn control(policy: PolicyId) -> PolicyControl {
        PolicyControl {
            policy,
            fit_price_delta: 30.0,
            fit_controller_gain: 4.0,
            tax_controller_gain: 1e-9,
            tax_floor: 0.001,
            tax_cap: 0.04,
            shortage_smoothing_time: 1.0,
            reserve_coverage: 1.0,
        }
    }

    #[test]
    fn base_changes_nothing() {
        let o = apply_policy(&control(PolicyId::Base), 0.001, 1e6, 5e5, 2020.0).unwrap();
        assert_eq!(o, PolicyOverrides::default());
    }

    #[test]
    fn higher_fit_adds_delta() {
        let o = apply_policy(&control(PolicyId::P1HigherFit), 0.001, 0.0, 0.0, 2020.0).unwrap();
        assert_eq!(o.fit_price_delta, 30.0);
        assert_eq!(o.fit_price_multiplier, 1.0);
        assert_eq!(PriceDeltaUnit::UsdPerKwh.to_model(0.03), 0.03);
        assert_eq!(PriceDeltaUnit::UsdPerMwh.to_model(30.0), 0.03);
    }

    #[test]
    fn budget_adjusted_fit_is_bounded() {
        let c = control(PolicyId::P2BudgetAdjustedFit);
        let idle = apply_policy(&c, 0.001, 1e6, 0.0, 2020.0).unwrap();
        assert_eq!(idle.fit_price_multiplier, 1.0);
        let mild = apply_policy(&c, 0.001, 1e6, 1e5, 2020.0)
            .unwrap()
            .fit_price_multiplier;
        let severe = apply_policy(&c, 0.001, 0.0, 1e7, 2020.0)
            .unwrap()
            .fit_price_multiplier;
        assert!(mild < 1.0 && mild > severe && severe > 0.0);
        assert_eq!(severe, 1.0 / 5.0);
    }

    #[test]
    fn budget_adjusted_tax_is_clamped() {
        let c = control(PolicyId::P3BudgetAdjustedTax);
        let idle = apply_policy(&c, 0.001, 1e6, 0.0, 2020.0).unwrap();
        assert_eq!(idle.res_tax, Some(0.001));
        let active = apply_policy(&c, 0.001, 1e6, 1e7, 2020.0).unwrap();
        assert_eq!(active.res_tax, Some(0.001 + 1e-9 * 1e7));
        let capped = apply_policy(&c, 0.001, 0.0, 1e12, 2020.0).unwrap();
        assert_eq!(capped.res_tax, Some(0.04));
    }

    #[test]
    fn zero_gains_are_neutral() {
        let zeroed = PolicyControl {
            fit_price_delta: 0.0,
            fit_controller_gain: 0.0,
            tax_controller_gain: 0.0,
            ..control(PolicyId::Base)
        };
        for policy in PolicyId::ALL {
            let o = apply_policy(&zeroed.with_policy(policy), 0.001, 5.0, 7e6, 2030.0).unwrap();
            assert_eq!(o.fit_price_delta, 0.0);
            assert_eq!(o.fit_price_multiplier, 1.0);
            assert!(o.res_tax.is_none_or(|t| t == 0.001));
        }
    }

    #[test]
    fn rejects_bad_signals_and_settings() {
        let c = control(PolicyId::Base);
        assert!(apply_policy(&c, 0.001, -1.0, 0.0, 2020.0).is_err());
        assert!(apply_policy(&c, 0.001, 0.0, f64::NAN, 2020.0).is_err());
        assert!(matches!(
            "p9".parse::<PolicyId>(),
            Err(Error::UnknownPolicy(_))
        ));
        assert_eq!(
            "p2_budget_adjusted_fit".parse::<PolicyId>().unwrap(),
            PolicyId::P2BudgetAdjustedFit
        );
        assert!(PolicyControl { tax_cap: 0.2, ..c }.validate().is_err());
        assert!(PolicyControl {
            tax_floor: 0.05,
            tax_cap: 0.04,
            ..c
        }
        .validate()
        .is_err());
        assert!(PolicyControl {
            fit_controller_gain: -1.0,
            ..c
        }
        .validate()
        .is_err());
        assert!(c.validate().is_ok());
    }
}
