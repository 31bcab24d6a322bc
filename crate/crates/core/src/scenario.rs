use std::collections::BTreeMap;

use serde::Serialize;

use crate::engine::{run_simulation, RunResult, SimulationClock};
use crate::error::{Error, Result};
use crate::model::{FitModel, ModelParameters};
use crate::policy::PolicyControl;

/// One named run: a clock, parameter overrides on top of the shared base
/// parameters, and the controller settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub clock: SimulationClock,
    pub overrides: BTreeMap<String, f64>,
    pub control: PolicyControl,
    /// Variables to write when the run is emitted; empty means all.
    pub outputs: Vec<String>,
}

impl Scenario {
    pub fn new(name: impl Into<String>, clock: SimulationClock, control: PolicyControl) -> Self {
        Self {
            name: name.into(),
            clock,
            overrides: BTreeMap::new(),
            control,
            outputs: Vec::new(),
        }
    }

    /// The base parameters with this scenario's overrides applied and validated.
    pub fn parameters(&self, base: &ModelParameters) -> Result<ModelParameters> {
        let mut p = *base;
        for (name, &value) in &self.overrides {
            p.set(name, value)?;
        }
        p.validate(&self.clock)?;
        Ok(p)
    }

    pub fn run(&self, base: &ModelParameters) -> Result<RunResult> {
        let tag = |e: Error| Error::Scenario {
            scenario: self.name.clone(),
            source: Box::new(e),
        };
        let params = self.parameters(base).map_err(tag)?;
        run_simulation(&mut FitModel::new(params, self.control), &self.clock).map_err(tag)
    }
}
