//! Discrete-time stock-flow kernel.
//!
//! Stocks are advanced with explicit Euler. Models plug in through the
//! [`Model`] trait and supply net rates plus any flows and auxiliaries they
//! want recorded; [`run_simulation`] drives the clock and collects a
//! [`RunResult`].

mod clock;
mod effect;
mod integrate;
mod lag;
mod run;
mod trend;

pub use clock::SimulationClock;
pub use effect::SigmoidEffect;
pub use integrate::{integrate_step, ClampEvent, StockSpec};
pub use lag::LaggedSeries;
pub use run::{run_simulation, ClampRecord, Evaluation, Model, RunResult, VariableKind, Warning};
pub use trend::LinearTrend;
