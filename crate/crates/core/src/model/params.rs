use serde::{Deserialize, Serialize};

use crate::engine::{LinearTrend, SigmoidEffect, SimulationClock};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EconomicParameters {
    pub capacity_factor: f64,
    /// Thousand dollars per MWh (numerically dollars per kWh).
    pub initial_fit_price: f64,
    /// Thousand dollars per MWh.
    pub om_cost: f64,
    pub interest_rate: f64,
    /// Years.
    pub remuneration_period: f64,
    /// Thousand dollars per MW.
    pub initial_capital_cost: f64,
    pub learning_exponent: f64,
    /// Years.
    pub time_to_build: f64,
    /// Years.
    pub normal_equipment_lifetime: f64,
    pub rejection_fraction: f64,
    /// MW.
    pub capacity_target: f64,
    /// Dollars per kWh of consumption.
    pub res_tax_base: f64,
    /// MW requested in the year before the start.
    pub initial_annual_requests: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialConditions {
    pub installed_capacity: f64,
    pub depreciated_capacity: f64,
    pub suna_debt: f64,
    pub budget: f64,
}

/// How the average tariff is formed from the two payment accumulators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AveragePriceMode {
    /// Total payment over total production (thousand dollars per MWh).
    #[default]
    PaymentPerProduction,
    /// The literal table transcription, production over payment. Kept for inspection only.
    ProductionPerPayment,
}

impl AveragePriceMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            AveragePriceMode::PaymentPerProduction => "payment_per_production",
            AveragePriceMode::ProductionPerPayment => "production_per_payment",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "payment_per_production" => Ok(Self::PaymentPerProduction),
            "production_per_payment" => Ok(Self::ProductionPerPayment),
            other => Err(Error::invariant(
                "average_price_mode",
                format!("expected payment_per_production or production_per_payment, got `{other}`"),
            )),
        }
    }
}

/// Closure rules for relations the model only gives as causal directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionRules {
    /// Lowest fraction of the initial tariff the goal-gap rule may announce.
    pub price_floor_multiplier: f64,
    /// Slope of social acceptance in the penetration rate.
    pub penetration_acceptance_gain: f64,
    /// Years; lower bound on the O&M-shortened lifetime.
    pub min_effective_lifetime: f64,
    /// Thousand dollars per year; guards the payment-delay denominator.
    pub delay_guard: f64,
    /// Years between a request year and the year that reads it.
    pub request_lag: f64,
    pub average_price_mode: AveragePriceMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SocialEffectSet {
    /// Input: tax in dollars per kWh.
    pub social_tolerance: SigmoidEffect,
    /// Input: delay in debt payment in years.
    pub investor_trust: SigmoidEffect,
    /// Input: delay in debt payment in years.
    pub om_activity: SigmoidEffect,
}

impl SocialEffectSet {
    /// Forces all three effects to (numerically) 1 over any realistic input.
    pub fn neutral() -> Self {
        let flat = SigmoidEffect::new(1.0, 1e300, 1.0).expect("valid");
        Self {
            social_tolerance: flat,
            investor_trust: flat,
            om_activity: flat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExogenousInputs {
    /// MW.
    pub total_generation_capacity: LinearTrend,
    /// GWh per year.
    pub electricity_consumption: LinearTrend,
}

/// Every constant the model reads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParameters {
    pub economics: EconomicParameters,
    pub initial: InitialConditions,
    pub rules: DecisionRules,
    pub effects: SocialEffectSet,
    pub exogenous: ExogenousInputs,
}

type Getter = fn(&ModelParameters) -> f64;
type Setter = fn(&mut ModelParameters, f64);

macro_rules! registry {
    ($( $name:literal => $($path:ident).+ ),* $(,)?) => {
        const NUMERIC: &[(&str, Getter, Setter)] = &[
            $( ($name, |p| p.$($path).+, |p, v| p.$($path).+ = v), )*
        ];
    };
}

registry! {
    "capacity_factor" => economics.capacity_factor,
    "initial_fit_price" => economics.initial_fit_price,
    "om_cost" => economics.om_cost,
    "interest_rate" => economics.interest_rate,
    "remuneration_period" => economics.remuneration_period,
    "initial_capital_cost" => economics.initial_capital_cost,
    "learning_exponent" => economics.learning_exponent,
    "time_to_build" => economics.time_to_build,
    "normal_equipment_lifetime" => economics.normal_equipment_lifetime,
    "rejection_fraction" => economics.rejection_fraction,
    "capacity_target" => economics.capacity_target,
    "res_tax_base" => economics.res_tax_base,
    "initial_annual_requests" => economics.initial_annual_requests,
    "initial_installed_capacity" => initial.installed_capacity,
    "initial_depreciated_capacity" => initial.depreciated_capacity,
    "initial_suna_debt" => initial.suna_debt,
    "initial_budget" => initial.budget,
    "price_floor_multiplier" => rules.price_floor_multiplier,
    "penetration_acceptance_gain" => rules.penetration_acceptance_gain,
    "min_effective_lifetime" => rules.min_effective_lifetime,
    "delay_guard" => rules.delay_guard,
    "request_lag" => rules.request_lag,
    "trends.total_generation_capacity.intercept" => exogenous.total_generation_capacity.intercept,
    "trends.total_generation_capacity.slope" => exogenous.total_generation_capacity.slope,
    "trends.total_generation_capacity.reference_year" => exogenous.total_generation_capacity.reference_year,
    "trends.electricity_consumption.intercept" => exogenous.electricity_consumption.intercept,
    "trends.electricity_consumption.slope" => exogenous.electricity_consumption.slope,
    "trends.electricity_consumption.reference_year" => exogenous.electricity_consumption.reference_year,
}

const EFFECT_NAMES: [&str; 3] = ["social_tolerance", "investor_trust", "om_activity"];
const EFFECT_FIELDS: [&str; 3] = ["y_max", "x_50", "p"];

impl ModelParameters {
    /// Every numeric parameter name accepted by [`get`](Self::get) and [`set`](Self::set).
    pub fn parameter_names() -> Vec<String> {
        let mut names: Vec<String> = NUMERIC.iter().map(|(n, _, _)| n.to_string()).collect();
        for effect in EFFECT_NAMES {
            for field in EFFECT_FIELDS {
                names.push(format!("effects.{effect}.{field}"));
            }
        }
        names
    }

    fn effect_mut(&mut self, name: &str) -> Option<&mut SigmoidEffect> {
        match name {
            "social_tolerance" => Some(&mut self.effects.social_tolerance),
            "investor_trust" => Some(&mut self.effects.investor_trust),
            "om_activity" => Some(&mut self.effects.om_activity),
            _ => None,
        }
    }

    fn effect(&self, name: &str) -> Option<&SigmoidEffect> {
        match name {
            "social_tolerance" => Some(&self.effects.social_tolerance),
            "investor_trust" => Some(&self.effects.investor_trust),
            "om_activity" => Some(&self.effects.om_activity),
            _ => None,
        }
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        if let Some((_, get, _)) = NUMERIC.iter().find(|(n, _, _)| *n == name) {
            return Ok(get(self));
        }
        if let Some(rest) = name.strip_prefix("effects.") {
            if let Some((effect, field)) = rest.split_once('.') {
                if let Some(e) = self.effect(effect) {
                    match field {
                        "y_max" => return Ok(e.y_max()),
                        "x_50" => return Ok(e.x_50()),
                        "p" => return Ok(e.p()),
                        _ => {}
                    }
                }
            }
        }
        Err(Error::UnknownParameter(name.to_string()))
    }

    /// Sets one parameter by name. Does not re-check invariants; call [`validate`](Self::validate).
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if let Some((_, _, set)) = NUMERIC.iter().find(|(n, _, _)| *n == name) {
            set(self, value);
            return Ok(());
        }
        if let Some(rest) = name.strip_prefix("effects.") {
            if let Some((effect, field)) = rest.split_once('.') {
                if let Some(e) = self.effect_mut(effect) {
                    let (mut y, mut x, mut p) = (e.y_max(), e.x_50(), e.p());
                    match field {
                        "y_max" => y = value,
                        "x_50" => x = value,
                        "p" => p = value,
                        _ => return Err(Error::UnknownParameter(name.to_string())),
                    }
                    *e = SigmoidEffect::new(y, x, p).map_err(|err| match err {
                        Error::Invariant { reason, .. } => Error::invariant(name, reason),
                        other => other,
                    })?;
                    return Ok(());
                }
            }
        }
        Err(Error::UnknownParameter(name.to_string()))
    }

    /// Checks every range constraint; trends are checked over `clock`.
    pub fn validate(&self, clock: &SimulationClock) -> Result<()> {
        let e = &self.economics;
        let positive = [
            ("capacity_factor", e.capacity_factor),
            ("initial_fit_price", e.initial_fit_price),
            ("om_cost", e.om_cost),
            ("initial_capital_cost", e.initial_capital_cost),
            ("time_to_build", e.time_to_build),
            ("normal_equipment_lifetime", e.normal_equipment_lifetime),
            ("capacity_target", e.capacity_target),
            (
                "initial_installed_capacity",
                self.initial.installed_capacity,
            ),
            ("min_effective_lifetime", self.rules.min_effective_lifetime),
            ("delay_guard", self.rules.delay_guard),
            ("request_lag", self.rules.request_lag),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invariant(name, format!("must be > 0, got {value}")));
            }
        }
        let non_negative = [
            ("interest_rate", e.interest_rate),
            ("learning_exponent", e.learning_exponent),
            ("res_tax_base", e.res_tax_base),
            ("initial_annual_requests", e.initial_annual_requests),
            (
                "initial_depreciated_capacity",
                self.initial.depreciated_capacity,
            ),
            ("initial_suna_debt", self.initial.suna_debt),
            ("initial_budget", self.initial.budget),
            (
                "penetration_acceptance_gain",
                self.rules.penetration_acceptance_gain,
            ),
        ];
        for (name, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::invariant(name, format!("must be >= 0, got {value}")));
            }
        }
        if e.capacity_factor > 1.0 {
            return Err(Error::invariant(
                "capacity_factor",
                format!("must be in (0, 1], got {}", e.capacity_factor),
            ));
        }
        if !(e.remuneration_period >= 1.0) {
            return Err(Error::invariant(
                "remuneration_period",
                format!("must be >= 1 year, got {}", e.remuneration_period),
            ));
        }
        if !(0.0..=1.0).contains(&e.rejection_fraction) {
            return Err(Error::invariant(
                "rejection_fraction",
                format!("must be in [0, 1], got {}", e.rejection_fraction),
            ));
        }
        let floor = self.rules.price_floor_multiplier;
        if !(floor > 0.0 && floor <= 1.0) {
            return Err(Error::invariant(
                "price_floor_multiplier",
                format!("must be in (0, 1], got {floor}"),
            ));
        }
        self.exogenous
            .total_generation_capacity
            .check_positive_over(clock, "trends.total_generation_capacity")?;
        self.exogenous
            .electricity_consumption
            .check_positive_over(clock, "trends.electricity_consumption")?;
        Ok(())
    }
}

impl Default for ModelParameters {
    /// The calibration shipped in `config/default.toml`.
    fn default() -> Self {
        crate::config::shipped().parameters
    }
}
