use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const STEP_TOLERANCE: f64 = 1e-9;

/// Simulation horizon in calendar years with a fixed step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationClock {
    start_year: f64,
    end_year: f64,
    dt: f64,
}

impl SimulationClock {
    pub fn new(start_year: f64, end_year: f64, dt: f64) -> Result<Self> {
        if !start_year.is_finite() || !end_year.is_finite() || !dt.is_finite() {
            return Err(Error::invariant(
                "clock",
                "start, end and dt must be finite",
            ));
        }
        if end_year <= start_year {
            return Err(Error::invariant(
                "clock.end_year",
                format!("end_year {end_year} must be after start_year {start_year}"),
            ));
        }
        if dt <= 0.0 {
            return Err(Error::invariant(
                "clock.dt",
                format!("dt must be > 0, got {dt}"),
            ));
        }
        let steps = (end_year - start_year) / dt;
        if (steps - steps.round()).abs() > STEP_TOLERANCE * steps.max(1.0) {
            return Err(Error::invariant(
                "clock.dt",
                format!(
                    "horizon {start_year}..{end_year} is not a whole number of {dt}-year steps"
                ),
            ));
        }
        Ok(Self {
            start_year,
            end_year,
            dt,
        })
    }

    pub fn start_year(&self) -> f64 {
        self.start_year
    }

    pub fn end_year(&self) -> f64 {
        self.end_year
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of integration steps; a run records `steps() + 1` rows.
    pub fn steps(&self) -> usize {
        ((self.end_year - self.start_year) / self.dt).round() as usize
    }

    /// Time of step `k`, computed from the start rather than accumulated.
    pub fn time_at(&self, k: usize) -> f64 {
        self.start_year + k as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps()).map(|k| self.time_at(k))
    }

    pub fn with_dt(&self, dt: f64) -> Result<Self> {
        Self::new(self.start_year, self.end_year, dt)
    }

    pub fn with_end_year(&self, end_year: f64) -> Result<Self> {
        Self::new(self.start_year, end_year, self.dt)
    }
}

impl Default for SimulationClock {
    fn default() -> Self {
        Self {
            start_year: 2015.0,
            end_year: 2035.0,
            dt: 0.25,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_horizon_has_80_steps() {
        let clock = SimulationClock::default();
        assert_eq!(clock.steps(), 80);
        assert_eq!(clock.times().count(), 81);
        assert_eq!(clock.time_at(80), 2035.0);
    }

    #[test]
    fn rejects_bad_clocks() {
        assert!(SimulationClock::new(2015.0, 2015.0, 0.25).is_err());
        assert!(SimulationClock::new(2015.0, 2035.0, 0.0).is_err());
        assert!(SimulationClock::new(2015.0, 2035.0, -1.0).is_err());
        assert!(SimulationClock::new(2015.0, 2035.0, 0.3).is_err());
        assert!(SimulationClock::new(2015.0, 2035.0, 0.125).is_ok());
    }
}
