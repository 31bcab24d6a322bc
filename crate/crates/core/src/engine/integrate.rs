use crate::error::{Error, Result};

/// Declares a stock and whether it is held at zero from below.
#[derive(Debug, Clone, PartialEq)]
pub struct StockSpec {
    pub name: String,
    pub non_negative: bool,
}

impl StockSpec {
    pub fn non_negative(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            non_negative: true,
        }
    }

    pub fn signed(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            non_negative: false,
        }
    }
}

/// A non-negative stock that Euler pushed below zero and was reset to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ClampEvent {
    pub stock: String,
    pub unclamped: f64,
}

/// One explicit Euler step: `stock + rate * dt` for every stock.
pub fn integrate_step(
    stocks: &[f64],
    rates: &[f64],
    dt: f64,
    specs: &[StockSpec],
) -> Result<(Vec<f64>, Vec<ClampEvent>)> {
    if stocks.len() != rates.len() || stocks.len() != specs.len() {
        return Err(Error::input(
            "rates",
            format!(
                "{} stocks, {} rates and {} specs must match",
                stocks.len(),
                rates.len(),
                specs.len()
            ),
        ));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::input("dt", format!("must be > 0, got {dt}")));
    }

    let mut events = Vec::new();
    let next = stocks
        .iter()
        .zip(rates)
        .zip(specs)
        .map(|((&stock, &rate), spec)| {
            if !rate.is_finite() {
                return Err(Error::Simulation {
                    time: f64::NAN,
                    variable: spec.name.clone(),
                    reason: format!("has non-finite rate {rate}"),
                });
            }
            let value = stock + rate * dt;
            if spec.non_negative && value < 0.0 {
                events.push(ClampEvent {
                    stock: spec.name.clone(),
                    unclamped: value,
                });
                Ok(0.0)
            } else {
                Ok(value)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((next, events))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> Vec<StockSpec> {
        vec![StockSpec::non_negative("s")]
    }

    #[test]
    fn euler_definition() {
        assert_eq!(
            integrate_step(&[120.0], &[0.0], 1.0, &spec()).unwrap().0,
            vec![120.0]
        );
        assert_eq!(
            integrate_step(&[120.0], &[10.0], 0.5, &spec()).unwrap().0,
            vec![125.0]
        );
    }

    #[test]
    fn clamps_non_negative_stock() {
        let (next, events) = integrate_step(&[3.0], &[-10.0], 1.0, &spec()).unwrap();
        assert_eq!(next, vec![0.0]);
        assert_eq!(
            events,
            vec![ClampEvent {
                stock: "s".into(),
                unclamped: -7.0
            }]
        );
        let (signed, events) =
            integrate_step(&[3.0], &[-10.0], 1.0, &[StockSpec::signed("s")]).unwrap();
        assert_eq!(signed, vec![-7.0]);
        assert!(events.is_empty());
    }

    #[test]
    fn non_finite_rate_names_variable() {
        let err = integrate_step(&[1.0], &[f64::NAN], 1.0, &spec()).unwrap_err();
        match err {
            Error::Simulation { variable, .. } => assert_eq!(variable, "s"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        assert!(integrate_step(&[1.0, 2.0], &[1.0], 1.0, &spec()).is_err());
    }
}
