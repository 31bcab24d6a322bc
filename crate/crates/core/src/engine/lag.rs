use crate::error::{Error, Result};

const GRID_EPS: f64 = 1e-9;

/// A recorded series read back with a fixed delay.
///
/// Values are recorded once per simulation step. A lookup at `t` returns the
/// value recorded at the step nearest `t - lag`, ties going to the earlier
/// step, or `initial_value` when `t - lag` lies before the first step.
#[derive(Debug, Clone, PartialEq)]
pub struct LaggedSeries {
    lag: f64,
    initial_value: f64,
    start: f64,
    dt: f64,
    history: Vec<f64>,
}

impl LaggedSeries {
    pub fn new(lag: f64, initial_value: f64, start: f64, dt: f64) -> Result<Self> {
        if !(lag.is_finite() && lag > 0.0) {
            return Err(Error::invariant("lag", format!("must be > 0, got {lag}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invariant("dt", format!("must be > 0, got {dt}")));
        }
        Ok(Self {
            lag,
            initial_value,
            start,
            dt,
            history: Vec::new(),
        })
    }

    pub fn lag(&self) -> f64 {
        self.lag
    }

    pub fn initial_value(&self) -> f64 {
        self.initial_value
    }

    pub fn history(&self) -> &[f64] {
        &self.history
    }

    pub fn clear(&mut self) {
        self.history.clear();
    }

    /// Records the value for time `t`, which must be the next step on the grid.
    pub fn record(&mut self, t: f64, value: f64) -> Result<()> {
        let expected = self.start + self.history.len() as f64 * self.dt;
        if (t - expected).abs() > GRID_EPS * self.dt.max(1.0) * expected.abs().max(1.0) {
            return Err(Error::Sequencing { time: t });
        }
        self.history.push(value);
        Ok(())
    }

    pub fn lookup(&self, t: f64) -> Result<f64> {
        let target = t - self.lag;
        let offset = (target - self.start) / self.dt;
        if offset < -GRID_EPS {
            return Ok(self.initial_value);
        }
        // Nearest grid index; an exact half-way point rounds down.
        let index = (offset - 0.5 - GRID_EPS).ceil().max(0.0) as usize;
        self.history
            .get(index)
            .copied()
            .ok_or(Error::Sequencing { time: t })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pre_history_returns_initial() {
        let series = LaggedSeries::new(1.0, 100.0, 2015.0, 0.25).unwrap();
        assert_eq!(series.lookup(2015.0).unwrap(), 100.0);
        assert_eq!(series.lookup(2015.75).unwrap(), 100.0);
    }

    #[test]
    fn exact_one_year_lag() {
        let mut series = LaggedSeries::new(1.0, 100.0, 2015.0, 1.0).unwrap();
        series.record(2015.0, 150.0).unwrap();
        series.record(2016.0, 200.0).unwrap();
        assert_eq!(series.lookup(2016.0).unwrap(), 150.0);
        assert_eq!(series.lookup(2017.0).unwrap(), 200.0);
    }

    #[test]
    fn off_grid_lookup_uses_nearest_step() {
        let mut series = LaggedSeries::new(1.0, 100.0, 2015.0, 0.25).unwrap();
        for k in 0..=8 {
            let t = 2015.0 + k as f64 * 0.25;
            let value = if t == 2016.0 { 200.0 } else { 300.0 + k as f64 };
            series.record(t, value).unwrap();
        }
        // 2017.1 - 1 = 2016.1 is 0.1 from 2016.0 and 0.15 from 2016.25.
        assert_eq!(series.lookup(2017.1).unwrap(), 200.0);
        // Exactly half-way between 2016.0 and 2016.25 goes to the earlier step.
        assert_eq!(series.lookup(2017.125).unwrap(), 200.0);
        assert_eq!(series.lookup(2017.13).unwrap(), 300.0 + 5.0);
    }

    #[test]
    fn lookup_before_recording_is_sequencing_error() {
        let mut series = LaggedSeries::new(1.0, 100.0, 2015.0, 0.25).unwrap();
        series.record(2015.0, 1.0).unwrap();
        assert!(matches!(
            series.lookup(2016.5),
            Err(Error::Sequencing { .. })
        ));
        assert!(matches!(
            series.record(2015.5, 1.0),
            Err(Error::Sequencing { .. })
        ));
    }

    #[test]
    fn rejects_non_positive_lag() {
        assert!(LaggedSeries::new(0.0, 1.0, 2015.0, 0.25).is_err());
    }
}
