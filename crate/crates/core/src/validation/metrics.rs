use serde::Serialize;

use crate::error::{Error, Result};

/// Fit statistics of a simulated series against a historical one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorReport {
    pub r_squared: f64,
    pub mse: f64,
    /// Percent.
    pub rmspe: f64,
    /// `None` when the fit is perfect and the decomposition is undefined.
    pub theil: Option<TheilComponents>,
}

/// Shares of the mean squared error due to bias, unequal variance and
/// unequal covariance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheilComponents {
    pub um: f64,
    pub us: f64,
    pub uc: f64,
}

/// Divisor used for the standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Moments {
    /// Divide by n.
    #[default]
    Population,
    /// Divide by n - 1.
    Sample,
}

fn check_pair(simulated: &[f64], historical: &[f64]) -> Result<()> {
    if simulated.len() != historical.len() {
        return Err(Error::LengthMismatch {
            simulated: simulated.len(),
            historical: historical.len(),
        });
    }
    if simulated.len() < 2 {
        return Err(Error::TooShort {
            required: 2,
            got: simulated.len(),
        });
    }
    for (name, series) in [("simulated", simulated), ("historical", historical)] {
        if let Some(i) = series.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(
                name,
                format!("value at index {i} is not finite"),
            ));
        }
    }
    Ok(())
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn mse(simulated: &[f64], historical: &[f64]) -> f64 {
    simulated
        .iter()
        .zip(historical)
        .map(|(s, h)| (s - h).powi(2))
        .sum::<f64>()
        / simulated.len() as f64
}

/// R squared, MSE, RMSPE and, when defined, the Theil decomposition.
pub fn error_metrics(simulated: &[f64], historical: &[f64]) -> Result<ErrorReport> {
    check_pair(simulated, historical)?;
    if let Some(index) = historical.iter().position(|&h| h == 0.0) {
        return Err(Error::ZeroHistorical { index });
    }
    let n = simulated.len() as f64;
    let mse = mse(simulated, historical);
    let rmspe = 100.0
        * (simulated
            .iter()
            .zip(historical)
            .map(|(s, h)| ((s - h) / h).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
    let mean_h = mean(historical);
    let total: f64 = historical.iter().map(|h| (h - mean_h).powi(2)).sum();
    let r_squared = if total > 0.0 {
        1.0 - mse * n / total
    } else if mse == 0.0 {
        1.0
    } else {
        f64::NEG_INFINITY
    };
    let theil = match theil_decomposition(simulated, historical, Moments::Population) {
        Ok(t) => Some(t),
        Err(Error::TheilUndefined) => None,
        Err(e) => return Err(e),
    };
    Ok(ErrorReport {
        r_squared,
        mse,
        rmspe,
        theil,
    })
}

/// Splits the mean squared error into bias, variance and covariance shares.
///
/// With [`Moments::Population`] the three shares sum to one exactly (up to
/// rounding). The sample variant rescales the standard deviations and is
/// provided for comparison with tools that use it.
pub fn theil_decomposition(
    simulated: &[f64],
    historical: &[f64],
    moments: Moments,
) -> Result<TheilComponents> {
    check_pair(simulated, historical)?;
    let mse = mse(simulated, historical);
    if mse == 0.0 {
        return Err(Error::TheilUndefined);
    }
    let n = simulated.len() as f64;
    let (ms, mh) = (mean(simulated), mean(historical));
    let (mut vs, mut vh, mut cov) = (0.0, 0.0, 0.0);
    for (s, h) in simulated.iter().zip(historical) {
        vs += (s - ms).powi(2);
        vh += (h - mh).powi(2);
        cov += (s - ms) * (h - mh);
    }
    let divisor = match moments {
        Moments::Population => n,
        Moments::Sample => n - 1.0,
    };
    let (ss, sh) = ((vs / divisor).sqrt(), (vh / divisor).sqrt());
    // r * ss * sh is the covariance, so the zero-variance case needs no special handling.
    let uc = 2.0 * (ss * sh - cov / divisor) / mse;
    Ok(TheilComponents {
        um: (ms - mh).powi(2) / mse,
        us: (ss - sh).powi(2) / mse,
        uc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_fit() {
        let h = [1.0, 2.0, 4.0, 8.0];
        let r = error_metrics(&h, &h).unwrap();
        assert_eq!(r.mse, 0.0);
        assert_eq!(r.rmspe, 0.0);
        assert_eq!(r.r_squared, 1.0);
        assert!(r.theil.is_none());
        assert!(matches!(
            theil_decomposition(&h, &h, Moments::Population),
            Err(Error::TheilUndefined)
        ));
    }

    #[test]
    fn constant_offset() {
        let h = [10.0, 12.0, 15.0, 11.0, 20.0];
        let c = 1.5;
        let s: Vec<f64> = h.iter().map(|v| v + c).collect();
        let r = error_metrics(&s, &h).unwrap();
        let m = h.iter().sum::<f64>() / 5.0;
        let ss: f64 = h.iter().map(|v| (v - m).powi(2)).sum();
        assert!((r.mse - c * c).abs() < 1e-12);
        assert!((r.r_squared - (1.0 - 5.0 * c * c / ss)).abs() < 1e-12);
        let t = r.theil.unwrap();
        assert!((t.um - 1.0).abs() < 1e-9 && t.us.abs() < 1e-9 && t.uc.abs() < 1e-9);
    }

    #[test]
    fn rmspe_by_hand() {
        // Relative errors 10% and -10%.
        let r = error_metrics(&[110.0, 180.0], &[100.0, 200.0]).unwrap();
        assert!((r.rmspe - 10.0).abs() < 1e-12);
    }

    #[test]
    fn pure_variance_scaling() {
        let h = [3.0, 7.0, 1.0, 9.0, 5.0];
        let m = 5.0;
        let s: Vec<f64> = h.iter().map(|v| m + 2.0 * (v - m)).collect();
        let t = theil_decomposition(&s, &h, Moments::Population).unwrap();
        assert!(t.um.abs() < 1e-9 && t.uc.abs() < 1e-9 && (t.us - 1.0).abs() < 1e-9);
    }

    #[test]
    fn input_errors() {
        assert!(matches!(
            error_metrics(&[1.0, 2.0], &[1.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            error_metrics(&[1.0], &[1.0]),
            Err(Error::TooShort { .. })
        ));
        assert!(matches!(
            error_metrics(&[1.0, 2.0], &[0.0, 2.0]),
            Err(Error::ZeroHistorical { index: 0 })
        ));
        assert!(error_metrics(&[f64::NAN, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn sample_moments_differ() {
        let h = [3.0, 7.0, 1.0, 9.0];
        let s = [4.0, 6.0, 2.0, 11.0];
        let p = theil_decomposition(&s, &h, Moments::Population).unwrap();
        let q = theil_decomposition(&s, &h, Moments::Sample).unwrap();
        assert_eq!(p.um, q.um);
        assert!(p.us != q.us);
    }

    proptest! {
        #[test]
        fn shares_sum_to_one(pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 2..40)) {
            let (s, h): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            if let Ok(t) = theil_decomposition(&s, &h, Moments::Population) {
                prop_assert!((t.um + t.us + t.uc - 1.0).abs() < 1e-9);
                prop_assert!(t.um >= 0.0 && t.us >= 0.0 && t.uc >= -1e-12);
            }
        }

        #[test]
        fn self_comparison_is_perfect(h in prop::collection::vec(1.0f64..1e6, 2..30)) {
            let r = error_metrics(&h, &h).unwrap();
            prop_assert_eq!(r.mse, 0.0);
            prop_assert_eq!(r.rmspe, 0.0);
            prop_assert_eq!(r.r_squared, 1.0);
        }
    }
}
