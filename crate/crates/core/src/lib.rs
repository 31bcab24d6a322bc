//! Feed-in tariff system-dynamics simulator.
//!
//! * [`engine`]: explicit-Euler stock-flow kernel, lags, trends, sigmoid effects.
//! * [`model`]: the tariff model over six stocks (capacity, debt, budget, payments).
//! * [`policy`]: base run and three budget policies, scenario suites, comparison checks.
//! * [`validation`]: error metrics, Theil decomposition, structural test suites.
//! * [`config`] and [`output`]: scenario files, CSV and chart emission.

pub mod engine;
pub mod error;

pub use error::{Error, Result};
pub mod config;
pub mod model;
pub mod output;
pub mod policy;
pub mod scenario;
pub mod validation;
