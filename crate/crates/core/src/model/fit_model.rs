use super::equations::{
    allocate_payments, compute_capital_cost, compute_delay_in_debt_payment, compute_depreciation,
    compute_fit_price, compute_production_and_price, compute_request_pipeline, compute_roi,
    compute_social_acceptance, compute_tendency_to_invest, tax_per_gwh,
};
use super::ModelParameters;
use crate::engine::{Evaluation, LaggedSeries, Model, SimulationClock, StockSpec};
use crate::error::{Error, Result};
use crate::policy::{apply_policy, PolicyControl};

pub const STOCKS: [&str; 7] = [
    "installed_capacity",
    "depreciated_capacity",
    "suna_debt",
    "budget",
    "total_electricity_production",
    "total_fit_payment",
    "perceived_shortage",
];

pub const FLOWS: [&str; 9] = [
    "construction_rate",
    "depreciation",
    "debt_creation",
    "debt_payment",
    "budget_increase",
    "budget_decrease",
    "electricity_production",
    "fit_payment_accrual",
    "shortage_perception_change",
];

pub const AUXILIARIES: [&str; 27] = [
    "total_generation_capacity",
    "electricity_consumption",
    "cumulative_installed_capacity",
    "capital_cost",
    "fit_price_goal_gap",
    "fit_price_multiplier",
    "fit_price",
    "roi",
    "penetration_rate",
    "average_fit_price",
    "desired_production_payment",
    "delay_in_debt_payment",
    "res_tax",
    "social_tolerance",
    "social_acceptance",
    "investor_trust",
    "om_activity",
    "effective_lifetime",
    "tendency_to_invest",
    "fit_requests_previous_year",
    "annual_fit_requests",
    "approved_fit_requests",
    "whole_desired_payment",
    "available_whole_payment",
    "actual_production_payment",
    "budget_shortage",
    "fit_price_delta",
];

/// The six model stocks plus the controller's perceived shortage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelState {
    /// MW.
    pub installed_capacity: f64,
    /// MW.
    pub depreciated_capacity: f64,
    /// Thousand dollars.
    pub suna_debt: f64,
    /// Thousand dollars.
    pub budget: f64,
    /// MWh.
    pub total_electricity_production: f64,
    /// Thousand dollars.
    pub total_fit_payment: f64,
    /// Thousand dollars; smoothed budget shortage seen by the controllers.
    pub perceived_shortage: f64,
}

impl ModelState {
    pub fn initial(params: &ModelParameters) -> Self {
        Self {
            installed_capacity: params.initial.installed_capacity,
            depreciated_capacity: params.initial.depreciated_capacity,
            suna_debt: params.initial.suna_debt,
            budget: params.initial.budget,
            total_electricity_production: 0.0,
            total_fit_payment: 0.0,
            perceived_shortage: 0.0,
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.installed_capacity,
            self.depreciated_capacity,
            self.suna_debt,
            self.budget,
            self.total_electricity_production,
            self.total_fit_payment,
            self.perceived_shortage,
        ]
    }

    pub fn from_slice(stocks: &[f64]) -> Result<Self> {
        match *stocks {
            [installed_capacity, depreciated_capacity, suna_debt, budget, total_electricity_production, total_fit_payment, perceived_shortage] => {
                Ok(Self {
                    installed_capacity,
                    depreciated_capacity,
                    suna_debt,
                    budget,
                    total_electricity_production,
                    total_fit_payment,
                    perceived_shortage,
                })
            }
            _ => Err(Error::input(
                "stocks",
                format!("expected {} stocks, got {}", STOCKS.len(), stocks.len()),
            )),
        }
    }
}

/// The tariff model wired for the engine.
#[derive(Debug, Clone)]
pub struct FitModel {
    params: ModelParameters,
    control: PolicyControl,
    requests: Option<LaggedSeries>,
    reference_capacity: f64,
}

impl FitModel {
    pub fn new(params: ModelParameters, control: PolicyControl) -> Self {
        let reference_capacity =
            params.initial.installed_capacity + params.initial.depreciated_capacity;
        Self {
            params,
            control,
            requests: None,
            reference_capacity,
        }
    }

    pub fn params(&self) -> &ModelParameters {
        &self.params
    }

    pub fn control(&self) -> &PolicyControl {
        &self.control
    }

    /// Net stock rates, flows and auxiliaries at `t`.
    ///
    /// Relations are evaluated in a fixed dependency order. The request
    /// history is appended as a side effect, so each time must be evaluated
    /// once, in order.
    pub fn derivatives(&mut self, state: &ModelState, t: f64) -> Result<Evaluation> {
        let p = &self.params;
        let econ = &p.economics;
        let effects = &p.effects;
        let requests = self
            .requests
            .as_mut()
            .ok_or_else(|| Error::Config("model evaluated before initialize".into()))?;
        let mut warnings = Vec::new();

        let total_generation_capacity = p.exogenous.total_generation_capacity.eval(t)?;
        let electricity_consumption = p.exogenous.electricity_consumption.eval(t)?;

        let installed = state.installed_capacity;
        let cumulative = installed + state.depreciated_capacity;
        let capital_cost = compute_capital_cost(cumulative, self.reference_capacity, econ)?;

        let overrides = apply_policy(
            &self.control,
            econ.res_tax_base,
            state.budget,
            state.perceived_shortage,
            t,
        )?;
        let no_override = crate::policy::PolicyOverrides::default();
        let fit_price_goal_gap = compute_fit_price(
            installed,
            econ,
            p.rules.price_floor_multiplier,
            &no_override,
        );
        let fit_price =
            compute_fit_price(installed, econ, p.rules.price_floor_multiplier, &overrides);
        let roi = compute_roi(econ, fit_price, capital_cost)?;

        let mut penetration_rate = installed / total_generation_capacity;
        if penetration_rate > 1.0 {
            warnings.push(format!(
                "installed capacity {installed:.1} MW exceeds total generation capacity {total_generation_capacity:.1} MW"
            ));
            penetration_rate = 1.0;
        }

        let production = compute_production_and_price(
            installed,
            state.total_electricity_production,
            state.total_fit_payment,
            fit_price,
            econ,
            p.rules.average_price_mode,
        );
        let delay = compute_delay_in_debt_payment(
            state.suna_debt,
            production.desired_payment,
            p.rules.delay_guard,
        );

        let res_tax = overrides.res_tax.unwrap_or(econ.res_tax_base);
        let social_tolerance = effects.social_tolerance.eval(res_tax)?;
        let social_acceptance = compute_social_acceptance(
            penetration_rate,
            res_tax,
            effects,
            p.rules.penetration_acceptance_gain,
        )?;
        let investor_trust = effects.investor_trust.eval(delay)?;
        let tendency = compute_tendency_to_invest(roi, social_acceptance, investor_trust);

        let previous_requests = requests.lookup(t)?;
        let pipeline = compute_request_pipeline(previous_requests, tendency, econ);
        requests.record(t, pipeline.annual_requests)?;

        let depreciation = compute_depreciation(
            installed,
            delay,
            econ,
            effects,
            p.rules.min_effective_lifetime,
        )?;

        let allocation =
            allocate_payments(state.budget, state.suna_debt, production.desired_payment);
        let budget_increase = electricity_consumption * tax_per_gwh(res_tax);
        let budget_decrease = allocation.debt_payment + allocation.actual_production_payment;

        let budget_shortage = (self.control.reserve_coverage * allocation.whole_desired_payment
            - state.budget)
            .max(0.0);
        let shortage_perception_change =
            (budget_shortage - state.perceived_shortage) / self.control.shortage_smoothing_time;

        let rates = vec![
            pipeline.construction_rate - depreciation.rate,
            depreciation.rate,
            allocation.debt_creation - allocation.debt_payment,
            budget_increase - budget_decrease,
            production.production,
            production.payment_accrual,
            shortage_perception_change,
        ];
        let flows = vec![
            pipeline.construction_rate,
            depreciation.rate,
            allocation.debt_creation,
            allocation.debt_payment,
            budget_increase,
            budget_decrease,
            production.production,
            production.payment_accrual,
            shortage_perception_change,
        ];
        let auxiliaries = vec![
            total_generation_capacity,
            electricity_consumption,
            cumulative,
            capital_cost,
            fit_price_goal_gap,
            overrides.fit_price_multiplier,
            fit_price,
            roi,
            penetration_rate,
            production.average_price,
            production.desired_payment,
            delay,
            res_tax,
            social_tolerance,
            social_acceptance,
            investor_trust,
            depreciation.om_activity,
            depreciation.effective_lifetime,
            tendency,
            previous_requests,
            pipeline.annual_requests,
            pipeline.approved_requests,
            allocation.whole_desired_payment,
            allocation.available_whole_payment,
            allocation.actual_production_payment,
            budget_shortage,
            overrides.fit_price_delta,
        ];
        Ok(Evaluation {
            rates,
            flows,
            auxiliaries,
            warnings,
        })
    }
}

impl Model for FitModel {
    fn stocks(&self) -> Vec<StockSpec> {
        STOCKS
            .iter()
            .map(|name| StockSpec::non_negative(*name))
            .collect()
    }

    fn flow_names(&self) -> Vec<String> {
        FLOWS.iter().map(|s| s.to_string()).collect()
    }

    fn auxiliary_names(&self) -> Vec<String> {
        AUXILIARIES.iter().map(|s| s.to_string()).collect()
    }

    fn initialize(&mut self, clock: &SimulationClock) -> Result<Vec<f64>> {
        self.params.validate(clock)?;
        self.control.validate()?;
        self.requests = Some(LaggedSeries::new(
            self.params.rules.request_lag,
            self.params.economics.initial_annual_requests,
            clock.start_year(),
            clock.dt(),
        )?);
        Ok(ModelState::initial(&self.params).to_vec())
    }

    fn evaluate(&mut self, t: f64, stocks: &[f64]) -> Result<Evaluation> {
        let state = ModelState::from_slice(stocks)?;
        self.derivatives(&state, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_simulation, LinearTrend, SigmoidEffect};
    use crate::model::SocialEffectSet;
    use crate::policy::PolicyId;

    fn params() -> ModelParameters {
        let mut p = crate::config::shipped().parameters;
        let e = &mut p.economics;
        e.capacity_factor = 0.25;
        e.initial_fit_price = 0.1;
        e.om_cost = 0.01;
        e.interest_rate = 0.1;
        e.remuneration_period = 20.0;
        e.initial_capital_cost = 1500.0;
        e.learning_exponent = 0.15;
        e.time_to_build = 2.0;
        e.normal_equipment_lifetime = 20.0;
        e.rejection_fraction = 0.5;
        e.capacity_target = 5000.0;
        e.res_tax_base = 0.001;
        e.initial_annual_requests = 100.0;
        p.initial.installed_capacity = 120.0;
        p.initial.depreciated_capacity = 0.0;
        p.initial.suna_debt = 0.0;
        p.initial.budget = 1e6;
        p.rules.price_floor_multiplier = 0.25;
        p.rules.penetration_acceptance_gain = 5.0;
        p.exogenous.total_generation_capacity = LinearTrend::new(74_000.0, 0.0, 2015.0);
        p.exogenous.electricity_consumption = LinearTrend::new(100_000.0, 0.0, 2015.0);
        p.effects = SocialEffectSet {
            social_tolerance: SigmoidEffect::new(1.0, 0.05, 7.0).unwrap(),
            investor_trust: SigmoidEffect::new(1.0, 5.0, 4.0).unwrap(),
            om_activity: SigmoidEffect::new(1.0, 5.0, 6.0).unwrap(),
        };
        p
    }

    fn first_step(p: ModelParameters) -> Evaluation {
        let clock = SimulationClock::new(2015.0, 2035.0, 0.25).unwrap();
        let control = crate::config::shipped().control.with_policy(PolicyId::Base);
        let mut model = FitModel::new(p, control);
        let stocks = model.initialize(&clock).unwrap();
        model.evaluate(2015.0, &stocks).unwrap()
    }

    fn aux(e: &Evaluation, name: &str) -> f64 {
        e.auxiliaries[AUXILIARIES.iter().position(|n| *n == name).unwrap()]
    }

    fn flow(e: &Evaluation, name: &str) -> f64 {
        e.flows[FLOWS.iter().position(|n| *n == name).unwrap()]
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn hand_traced_first_step() {
        let e = first_step(params());
        let price = 0.1 * (4880.0 / 5000.0);
        assert!(close(aux(&e, "fit_price"), price));
        assert!(close(aux(&e, "capital_cost"), 1500.0));

        let mut present = 0.0;
        for k in 1..=20 {
            present += 0.25 * 8760.0 * (price - 0.01) / 1.1f64.powi(k);
        }
        let roi = (present - 1500.0) / 1500.0;
        assert!((aux(&e, "roi") - roi).abs() < 1e-9);

        let acceptance = (1.0 + 5.0 * 120.0 / 74_000.0) / (1.0 + 0.02f64.powi(7));
        assert!(close(aux(&e, "social_acceptance"), acceptance));
        assert_eq!(aux(&e, "investor_trust"), 1.0);
        assert_eq!(aux(&e, "delay_in_debt_payment"), 0.0);
        let tendency = roi * acceptance;
        assert!((aux(&e, "tendency_to_invest") - tendency).abs() < 1e-9);
        assert!((flow(&e, "construction_rate") - 100.0 * tendency * 0.5 / 2.0).abs() < 1e-7);

        assert!(close(flow(&e, "depreciation"), 6.0));
        assert!(close(flow(&e, "electricity_production"), 262_800.0));
        assert!(close(
            aux(&e, "desired_production_payment"),
            262_800.0 * price
        ));
        assert_eq!(flow(&e, "debt_creation"), 0.0);
        assert!(close(flow(&e, "budget_increase"), 100_000.0));
        assert!(close(flow(&e, "budget_decrease"), 262_800.0 * price));
    }

    #[test]
    fn zero_tax_means_no_budget_inflow() {
        let mut p = params();
        p.economics.res_tax_base = 0.0;
        assert_eq!(flow(&first_step(p), "budget_increase"), 0.0);
    }

    #[test]
    fn one_year_remuneration_stops_investment() {
        let mut p = params();
        p.economics.remuneration_period = 1.0;
        let e = first_step(p);
        assert!(aux(&e, "roi") < -0.5);
        assert_eq!(aux(&e, "tendency_to_invest"), 0.0);
        assert_eq!(flow(&e, "construction_rate"), 0.0);
    }

    #[test]
    fn neutral_effects_leave_roi_times_base_acceptance() {
        let mut p = params();
        p.effects = SocialEffectSet::neutral();
        p.initial.suna_debt = 5e5;
        let clock = SimulationClock::new(2015.0, 2025.0, 0.25).unwrap();
        let control = crate::config::shipped().control.with_policy(PolicyId::Base);
        let r = run_simulation(&mut FitModel::new(p, control), &clock).unwrap();
        let s = |n: &str| r.series(n).unwrap();
        for k in 0..r.len() {
            let base_acceptance = 1.0 + 5.0 * s("penetration_rate")[k];
            assert_eq!(
                s("tendency_to_invest")[k],
                s("roi")[k].max(0.0) * base_acceptance
            );
        }
    }

    #[test]
    fn state_vector_round_trip() {
        let state = ModelState::initial(&params());
        assert_eq!(ModelState::from_slice(&state.to_vec()).unwrap(), state);
        assert!(ModelState::from_slice(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn evaluation_needs_initialization() {
        let control = crate::config::shipped().control;
        let mut model = FitModel::new(params(), control);
        let state = ModelState::initial(&params());
        assert!(model.derivatives(&state, 2015.0).is_err());
    }
}
