//! The feed-in tariff model: parameters, the individual equations, and
//! their assembly into an engine [`Model`](crate::engine::Model).

pub mod equations;
mod fit_model;
mod params;

pub use equations::{
    allocate_payments, annuity_factor, compute_capital_cost, compute_delay_in_debt_payment,
    compute_depreciation, compute_fit_price, compute_production_and_price,
    compute_request_pipeline, compute_roi, compute_social_acceptance, compute_tendency_to_invest,
    Depreciation, PaymentAllocation, ProductionAndPrice, RequestPipeline,
};
pub use fit_model::{FitModel, ModelState, AUXILIARIES, FLOWS, STOCKS};
pub use params::{
    AveragePriceMode, DecisionRules, EconomicParameters, ExogenousInputs, InitialConditions,
    ModelParameters, SocialEffectSet,
};

/// Hours in a (non-leap) year.
pub const HOURS_PER_YEAR: f64 = 8760.0;

/// Thousand dollars per GWh in one dollar per kWh.
///
/// Model money is in thousand dollars, consumption in GWh and tariffs in
/// thousand dollars per MWh, which is numerically dollars per kWh.
pub const TAX_SCALE: f64 = 1000.0;
