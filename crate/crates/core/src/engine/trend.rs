use serde::{Deserialize, Serialize};

use super::SimulationClock;
use crate::error::{Error, Result};

/// Exogenous straight-line series `intercept + slope * (t - reference_year)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearTrend {
    pub intercept: f64,
    pub slope: f64,
    pub reference_year: f64,
}

impl LinearTrend {
    pub fn new(intercept: f64, slope: f64, reference_year: f64) -> Self {
        Self {
            intercept,
            slope,
            reference_year,
        }
    }

    /// Evaluates the trend, failing if the result is not strictly positive.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let value = self.intercept + self.slope * (t - self.reference_year);
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::Config(format!(
                "linear trend evaluates to {value} at t={t}; it must stay positive"
            )));
        }
        Ok(value)
    }

    /// A line is positive on an interval iff it is positive at both ends.
    pub fn check_positive_over(&self, clock: &SimulationClock, name: &str) -> Result<()> {
        for t in [clock.start_year(), clock.end_year()] {
            self.eval(t)
                .map_err(|e| Error::invariant(name, e.to_string()))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_line() {
        assert_eq!(
            LinearTrend::new(100.0, 0.0, 2015.0).eval(2030.0).unwrap(),
            100.0
        );
        assert_eq!(
            LinearTrend::new(100.0, 5.0, 2015.0).eval(2015.0).unwrap(),
            100.0
        );
        assert_eq!(
            LinearTrend::new(100.0, 5.0, 2015.0).eval(2020.0).unwrap(),
            125.0
        );
    }

    #[test]
    fn non_positive_is_config_error() {
        let trend = LinearTrend::new(100.0, -10.0, 2015.0);
        assert!(trend.eval(2025.0).is_err());
        assert!(trend.eval(2030.0).is_err());
        let clock = SimulationClock::default();
        assert!(matches!(
            trend.check_positive_over(&clock, "trends.x"),
            Err(Error::Invariant { .. })
        ));
        assert!(LinearTrend::new(100.0, 1.0, 2015.0)
            .check_positive_over(&clock, "trends.x")
            .is_ok());
    }
}
