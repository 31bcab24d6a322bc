use std::collections::BTreeMap;

use super::{integrate_step, SimulationClock, StockSpec};
use crate::error::{Error, Result};

/// A model the kernel can drive.
///
/// `evaluate` is called exactly once per recorded time, in increasing order,
/// so models may keep sequential state (lag histories, for instance) that
/// `initialize` resets.
pub trait Model {
    fn stocks(&self) -> Vec<StockSpec>;
    fn flow_names(&self) -> Vec<String>;
    fn auxiliary_names(&self) -> Vec<String>;
    fn initialize(&mut self, clock: &SimulationClock) -> Result<Vec<f64>>;
    fn evaluate(&mut self, t: f64, stocks: &[f64]) -> Result<Evaluation>;
}

/// Everything a model reports at one instant.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Evaluation {
    /// Net rate per stock, in declaration order.
    pub rates: Vec<f64>,
    pub flows: Vec<f64>,
    pub auxiliaries: Vec<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VariableKind {
    Stock,
    Flow,
    Auxiliary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClampRecord {
    pub time: f64,
    pub stock: String,
    pub unclamped: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Warning {
    pub time: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
struct Column {
    name: String,
    kind: VariableKind,
    values: Vec<f64>,
}

/// Per-step record of a whole run, including the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    clock: SimulationClock,
    times: Vec<f64>,
    columns: Vec<Column>,
    index: BTreeMap<String, usize>,
    net_rates: Vec<Vec<f64>>,
    clamp_events: Vec<ClampRecord>,
    warnings: Vec<Warning>,
}

impl RunResult {
    pub fn clock(&self) -> &SimulationClock {
        &self.clock
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.index
            .get(name)
            .map(|&i| self.columns[i].values.as_slice())
    }

    pub fn kind(&self, name: &str) -> Option<VariableKind> {
        self.index.get(name).map(|&i| self.columns[i].kind)
    }

    /// Names of one kind, in declaration order.
    pub fn names(&self, kind: VariableKind) -> impl Iterator<Item = &str> {
        self.columns
            .iter()
            .filter(move |c| c.kind == kind)
            .map(|c| c.name.as_str())
    }

    /// `time` first, then stocks, flows and auxiliaries, each group sorted by name.
    pub fn column_order(&self) -> Vec<&str> {
        let mut order = vec!["time"];
        for kind in [
            VariableKind::Stock,
            VariableKind::Flow,
            VariableKind::Auxiliary,
        ] {
            let mut group: Vec<&str> = self.names(kind).collect();
            group.sort_unstable();
            order.extend(group);
        }
        order
    }

    pub fn final_value(&self, name: &str) -> Option<f64> {
        self.series(name).and_then(|s| s.last().copied())
    }

    /// Value at the recorded step nearest `year`.
    pub fn value_at(&self, name: &str, year: f64) -> Option<f64> {
        let series = self.series(name)?;
        let k = ((year - self.clock.start_year()) / self.clock.dt()).round();
        if k < 0.0 {
            return None;
        }
        series.get(k as usize).copied()
    }

    /// Net rate of a stock at every recorded step (the last one is never integrated).
    pub fn net_rate_series(&self, stock: &str) -> Option<Vec<f64>> {
        let position = self.names(VariableKind::Stock).position(|n| n == stock)?;
        Some(self.net_rates.iter().map(|r| r[position]).collect())
    }

    pub fn clamp_events(&self) -> &[ClampRecord] {
        &self.clamp_events
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }
}

fn check_finite(time: f64, names: &[String], values: &[f64]) -> Result<()> {
    for (name, &value) in names.iter().zip(values) {
        if !value.is_finite() {
            return Err(Error::Simulation {
                time,
                variable: name.clone(),
                reason: format!("is non-finite ({value})"),
            });
        }
    }
    Ok(())
}

fn check_len(time: f64, what: &str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Simulation {
            time,
            variable: what.to_string(),
            reason: format!("model returned {got} values, declared {expected}"),
        });
    }
    Ok(())
}

fn tag_time(err: Error, time: f64) -> Error {
    match err {
        Error::Simulation {
            time: t,
            variable,
            reason,
        } if t.is_nan() => Error::Simulation {
            time,
            variable,
            reason,
        },
        Error::Input { name, reason } => Error::Simulation {
            time,
            variable: name,
            reason,
        },
        other => other,
    }
}

/// Integrates `model` over `clock` with explicit Euler and records every step.
pub fn run_simulation<M: Model + ?Sized>(
    model: &mut M,
    clock: &SimulationClock,
) -> Result<RunResult> {
    let specs = model.stocks();
    let stock_names: Vec<String> = specs.iter().map(|s| s.name.clone()).collect();
    let flow_names = model.flow_names();
    let aux_names = model.auxiliary_names();

    let mut columns = Vec::with_capacity(stock_names.len() + flow_names.len() + aux_names.len());
    for (names, kind) in [
        (&stock_names, VariableKind::Stock),
        (&flow_names, VariableKind::Flow),
        (&aux_names, VariableKind::Auxiliary),
    ] {
        columns.extend(names.iter().map(|name| Column {
            name: name.clone(),
            kind,
            values: Vec::with_capacity(clock.steps() + 1),
        }));
    }
    let mut index = BTreeMap::new();
    for (i, column) in columns.iter().enumerate() {
        if column.name == "time" || index.insert(column.name.clone(), i).is_some() {
            return Err(Error::Config(format!(
                "duplicate variable name `{}`",
                column.name
            )));
        }
    }

    let start = clock.start_year();
    let mut stocks = model.initialize(clock)?;
    check_len(start, "stocks", specs.len(), stocks.len())?;
    check_finite(start, &stock_names, &stocks)?;

    let steps = clock.steps();
    let mut times = Vec::with_capacity(steps + 1);
    let mut net_rates = Vec::with_capacity(steps + 1);
    let mut clamp_events = Vec::new();
    let mut warnings = Vec::new();

    for k in 0..=steps {
        let t = clock.time_at(k);
        let eval = model.evaluate(t, &stocks).map_err(|e| tag_time(e, t))?;
        check_len(t, "rates", specs.len(), eval.rates.len())?;
        check_len(t, "flows", flow_names.len(), eval.flows.len())?;
        check_len(t, "auxiliaries", aux_names.len(), eval.auxiliaries.len())?;
        check_finite(t, &flow_names, &eval.flows)?;
        check_finite(t, &aux_names, &eval.auxiliaries)?;

        times.push(t);
        let recorded = stocks.iter().chain(&eval.flows).chain(&eval.auxiliaries);
        for (column, &value) in columns.iter_mut().zip(recorded) {
            column.values.push(value);
        }
        warnings.extend(
            eval.warnings
                .into_iter()
                .map(|message| Warning { time: t, message }),
        );

        if k < steps {
            let (next, events) = integrate_step(&stocks, &eval.rates, clock.dt(), &specs)
                .map_err(|e| tag_time(e, t))?;
            check_finite(clock.time_at(k + 1), &stock_names, &next)?;
            clamp_events.extend(events.into_iter().map(|e| ClampRecord {
                time: clock.time_at(k + 1),
                stock: e.stock,
                unclamped: e.unclamped,
            }));
            stocks = next;
        }
        net_rates.push(eval.rates);
    }

    Ok(RunResult {
        clock: *clock,
        times,
        columns,
        index,
        net_rates,
        clamp_events,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ds/dt = -s / tau with an auxiliary echoing the outflow.
    struct Decay {
        tau: f64,
        initial: f64,
    }

    impl Model for Decay {
        fn stocks(&self) -> Vec<StockSpec> {
            vec![StockSpec::non_negative("s")]
        }
        fn flow_names(&self) -> Vec<String> {
            vec!["outflow".into()]
        }
        fn auxiliary_names(&self) -> Vec<String> {
            vec!["half".into()]
        }
        fn initialize(&mut self, _: &SimulationClock) -> Result<Vec<f64>> {
            Ok(vec![self.initial])
        }
        fn evaluate(&mut self, _: f64, s: &[f64]) -> Result<Evaluation> {
            let out = s[0] / self.tau;
            Ok(Evaluation {
                rates: vec![-out],
                flows: vec![out],
                auxiliaries: vec![s[0] / 2.0],
                warnings: vec![],
            })
        }
    }

    struct Constant;

    impl Model for Constant {
        fn stocks(&self) -> Vec<StockSpec> {
            vec![StockSpec::non_negative("a"), StockSpec::signed("b")]
        }
        fn flow_names(&self) -> Vec<String> {
            vec![]
        }
        fn auxiliary_names(&self) -> Vec<String> {
            vec![]
        }
        fn initialize(&mut self, _: &SimulationClock) -> Result<Vec<f64>> {
            Ok(vec![1.0, -2.0])
        }
        fn evaluate(&mut self, _: f64, _: &[f64]) -> Result<Evaluation> {
            Ok(Evaluation {
                rates: vec![0.0, 0.0],
                ..Default::default()
            })
        }
    }

    struct Exploding;

    impl Model for Exploding {
        fn stocks(&self) -> Vec<StockSpec> {
            vec![StockSpec::signed("x")]
        }
        fn flow_names(&self) -> Vec<String> {
            vec![]
        }
        fn auxiliary_names(&self) -> Vec<String> {
            vec![]
        }
        fn initialize(&mut self, _: &SimulationClock) -> Result<Vec<f64>> {
            Ok(vec![1.0])
        }
        fn evaluate(&mut self, t: f64, _: &[f64]) -> Result<Evaluation> {
            let rate = if t >= 2017.0 { f64::INFINITY } else { 1.0 };
            Ok(Evaluation {
                rates: vec![rate],
                ..Default::default()
            })
        }
    }

    #[test]
    fn constant_model_keeps_stocks() {
        let clock = SimulationClock::new(2015.0, 2020.0, 0.5).unwrap();
        let result = run_simulation(&mut Constant, &clock).unwrap();
        assert_eq!(result.len(), clock.steps() + 1);
        assert!(result.series("a").unwrap().iter().all(|&v| v == 1.0));
        assert!(result.series("b").unwrap().iter().all(|&v| v == -2.0));
    }

    #[test]
    fn exponential_decay_tracks_analytic_solution() {
        let clock = SimulationClock::new(0.0, 20.0, 0.25).unwrap();
        let mut model = Decay {
            tau: 20.0,
            initial: 120.0,
        };
        let result = run_simulation(&mut model, &clock).unwrap();
        let exact = 120.0 * (-1.0f64).exp();
        let last = result.final_value("s").unwrap();
        assert!((last - exact).abs() / exact < 0.02, "{last} vs {exact}");
        assert_eq!(result.series("outflow").unwrap()[0], 6.0);
        assert_eq!(result.series("half").unwrap()[0], 60.0);
    }

    #[test]
    fn column_order_and_lookup() {
        let clock = SimulationClock::new(0.0, 1.0, 0.5).unwrap();
        let result = run_simulation(
            &mut Decay {
                tau: 1.0,
                initial: 1.0,
            },
            &clock,
        )
        .unwrap();
        assert_eq!(result.column_order(), vec!["time", "s", "outflow", "half"]);
        assert_eq!(result.kind("outflow"), Some(VariableKind::Flow));
        assert_eq!(result.value_at("s", 0.5), Some(0.5));
        assert_eq!(result.net_rate_series("s").unwrap().len(), 3);
    }

    #[test]
    fn abort_reports_time_and_variable() {
        let clock = SimulationClock::new(2015.0, 2020.0, 0.5).unwrap();
        match run_simulation(&mut Exploding, &clock).unwrap_err() {
            Error::Simulation { time, variable, .. } => {
                assert_eq!(time, 2017.0);
                assert_eq!(variable, "x");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
