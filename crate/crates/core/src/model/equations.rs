//! Individual model relations. All are pure functions of their arguments.

use super::{AveragePriceMode, EconomicParameters, SocialEffectSet, HOURS_PER_YEAR, TAX_SCALE};
use crate::error::{Error, Result};
use crate::policy::PolicyOverrides;

/// Present value of 1 per year for `years` years at rate `rate`.
///
/// `((1+i)^n - 1) / (i (1+i)^n)`, with the `i -> 0` limit `n`.
pub fn annuity_factor(rate: f64, years: f64) -> f64 {
    if rate == 0.0 {
        return years;
    }
    let growth = (1.0 + rate).powf(years);
    (growth - 1.0) / (rate * growth)
}

/// Return on investment of one MW over the remuneration period.
///
/// Annual net revenue per MW is discounted as an annuity and compared with
/// the capital cost. A tariff below O&M cost gives negative revenue.
pub fn compute_roi(econ: &EconomicParameters, fit_price: f64, capital_cost: f64) -> Result<f64> {
    if !(capital_cost > 0.0) {
        return Err(Error::input(
            "capital_cost",
            format!("must be > 0, got {capital_cost}"),
        ));
    }
    if !(econ.remuneration_period >= 1.0) {
        return Err(Error::input(
            "remuneration_period",
            format!("must be >= 1, got {}", econ.remuneration_period),
        ));
    }
    let annual_net_revenue = econ.capacity_factor * HOURS_PER_YEAR * (fit_price - econ.om_cost);
    let present_value =
        annual_net_revenue * annuity_factor(econ.interest_rate, econ.remuneration_period);
    Ok((present_value - capital_cost) / capital_cost)
}

/// Experience curve: cost falls as a power of cumulative capacity relative to `reference_capacity`.
pub fn compute_capital_cost(
    cumulative_capacity: f64,
    reference_capacity: f64,
    econ: &EconomicParameters,
) -> Result<f64> {
    if !(cumulative_capacity > 0.0) {
        return Err(Error::input(
            "cumulative_installed_capacity",
            format!("must be > 0, got {cumulative_capacity}"),
        ));
    }
    if !(reference_capacity > 0.0) {
        return Err(Error::input(
            "reference_capacity",
            format!("must be > 0, got {reference_capacity}"),
        ));
    }
    Ok(econ.initial_capital_cost
        * (cumulative_capacity / reference_capacity).powf(-econ.learning_exponent))
}

/// Goal-gap tariff: the announced price shrinks linearly with the remaining
/// gap to the capacity target, never below `floor` times the initial price.
/// Policy overrides then scale and shift the result.
pub fn compute_fit_price(
    installed: f64,
    econ: &EconomicParameters,
    floor: f64,
    overrides: &PolicyOverrides,
) -> f64 {
    let gap_fraction = ((econ.capacity_target - installed) / econ.capacity_target).max(0.0);
    let base = econ.initial_fit_price * gap_fraction.clamp(floor, 1.0);
    base * overrides.fit_price_multiplier + overrides.fit_price_delta
}

/// Diffusion-boosted acceptance attenuated by tax tolerance. `res_tax` is in dollars per kWh.
pub fn compute_social_acceptance(
    penetration: f64,
    res_tax: f64,
    effects: &SocialEffectSet,
    penetration_gain: f64,
) -> Result<f64> {
    let base = 1.0 + penetration_gain * penetration;
    Ok(base * effects.social_tolerance.eval(res_tax)?)
}

/// Debt backlog in years of current desired production payment.
pub fn compute_delay_in_debt_payment(
    suna_debt: f64,
    desired_production_payment: f64,
    guard: f64,
) -> f64 {
    if suna_debt <= 0.0 {
        return 0.0;
    }
    suna_debt / desired_production_payment.max(guard)
}

/// Investment appetite; a loss-making project attracts none.
pub fn compute_tendency_to_invest(roi: f64, acceptance: f64, trust: f64) -> f64 {
    roi.max(0.0) * acceptance * trust
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequestPipeline {
    /// MW.
    pub annual_requests: f64,
    /// MW.
    pub approved_requests: f64,
    /// MW per year.
    pub construction_rate: f64,
}

pub fn compute_request_pipeline(
    prev_requests: f64,
    tendency: f64,
    econ: &EconomicParameters,
) -> RequestPipeline {
    let annual_requests = prev_requests * tendency;
    let approved_requests = annual_requests * (1.0 - econ.rejection_fraction);
    RequestPipeline {
        annual_requests,
        approved_requests,
        construction_rate: approved_requests / econ.time_to_build,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Depreciation {
    /// Fraction of ideal O&M carried out.
    pub om_activity: f64,
    /// Years.
    pub effective_lifetime: f64,
    /// MW per year.
    pub rate: f64,
}

/// Late payment cuts O&M, which shortens equipment life.
pub fn compute_depreciation(
    installed: f64,
    delay: f64,
    econ: &EconomicParameters,
    effects: &SocialEffectSet,
    min_lifetime: f64,
) -> Result<Depreciation> {
    let om_activity = effects.om_activity.eval(delay)?;
    let effective_lifetime = (econ.normal_equipment_lifetime * om_activity).max(min_lifetime);
    Ok(Depreciation {
        om_activity,
        effective_lifetime,
        rate: installed / effective_lifetime,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaymentAllocation {
    pub whole_desired_payment: f64,
    pub available_whole_payment: f64,
    pub debt_payment: f64,
    pub actual_production_payment: f64,
    pub debt_creation: f64,
}

/// Splits what the budget can cover between old debt (first) and this year's production.
pub fn allocate_payments(
    budget: f64,
    suna_debt: f64,
    desired_production_payment: f64,
) -> PaymentAllocation {
    let whole_desired_payment = suna_debt + desired_production_payment;
    let available_whole_payment = budget.min(whole_desired_payment);
    let debt_payment = available_whole_payment.min(suna_debt);
    let actual_production_payment =
        (available_whole_payment - suna_debt).clamp(0.0, desired_production_payment);
    PaymentAllocation {
        whole_desired_payment,
        available_whole_payment,
        debt_payment,
        actual_production_payment,
        debt_creation: desired_production_payment - actual_production_payment,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductionAndPrice {
    /// MWh per year; also the inflow of the production accumulator.
    pub production: f64,
    /// Thousand dollars per MWh.
    pub average_price: f64,
    /// Thousand dollars per year.
    pub desired_payment: f64,
    /// Thousand dollars per year into the tariff-payment accumulator.
    pub payment_accrual: f64,
}

pub fn compute_production_and_price(
    installed: f64,
    total_production: f64,
    total_payment: f64,
    current_fit_price: f64,
    econ: &EconomicParameters,
    mode: AveragePriceMode,
) -> ProductionAndPrice {
    let production = installed * econ.capacity_factor * HOURS_PER_YEAR;
    let average_price = match mode {
        AveragePriceMode::PaymentPerProduction if total_production > 0.0 => {
            total_payment / total_production
        }
        AveragePriceMode::ProductionPerPayment if total_payment > 0.0 => {
            total_production / total_payment
        }
        _ => current_fit_price,
    };
    ProductionAndPrice {
        production,
        average_price,
        desired_payment: production * average_price,
        payment_accrual: production * current_fit_price,
    }
}

/// Converts a tax in dollars per kWh to thousand dollars per GWh.
pub fn tax_per_gwh(res_tax_per_kwh: f64) -> f64 {
    res_tax_per_kwh * TAX_SCALE
}
