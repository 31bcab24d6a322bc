use serde::Serialize;

/// Relative size below which a movement of the smoothed series is noise.
const RELATIVE_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Slope {
    Falling,
    Flat,
    Rising,
}

/// Coarse shape of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BehaviorSignature {
    /// Local maxima of the 3-point smoothed series.
    pub local_maxima: usize,
    pub final_slope: Slope,
    /// First time the raw series is strictly positive.
    pub onset: Option<f64>,
}

impl BehaviorSignature {
    /// Same shape, with onsets allowed to differ by up to `onset_tolerance` years.
    pub fn matches(&self, other: &BehaviorSignature, onset_tolerance: f64) -> bool {
        self.local_maxima == other.local_maxima
            && self.final_slope == other.final_slope
            && match (self.onset, other.onset) {
                (Some(a), Some(b)) => (a - b).abs() <= onset_tolerance,
                (None, None) => true,
                _ => false,
            }
    }
}

/// Centered 3-point moving average; the end points reuse themselves as the
/// missing neighbour.
pub fn smooth3(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|i| {
            let prev = values[i.saturating_sub(1)];
            let next = values[(i + 1).min(n - 1)];
            (prev + values[i] + next) / 3.0
        })
        .collect()
}

fn scale(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Indices of the local maxima of `values`. A plateau counts once, at its
/// first index, and only if the series rises into it and falls after it.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let eps = RELATIVE_EPS * scale(values);
    let mut found = Vec::new();
    let mut i = 1;
    while i + 1 < values.len() {
        if values[i] - values[i - 1] > eps {
            let mut j = i + 1;
            while j < values.len() && (values[j] - values[i]).abs() <= eps {
                j += 1;
            }
            if j < values.len() && values[j] < values[i] - eps {
                found.push(i);
            }
            i = j.max(i + 1);
        } else {
            i += 1;
        }
    }
    found
}

/// Classifies a trajectory sampled at `times`.
///
/// All thresholds are relative to the largest magnitude in the series, so a
/// uniform positive rescaling leaves the signature unchanged.
pub fn classify(times: &[f64], values: &[f64]) -> BehaviorSignature {
    assert_eq!(times.len(), values.len(), "times and values must align");
    let onset = values.iter().position(|&v| v > 0.0).map(|i| times[i]);
    if values.len() < 2 {
        return BehaviorSignature {
            local_maxima: 0,
            final_slope: Slope::Flat,
            onset,
        };
    }
    let smoothed = smooth3(values);
    let eps = RELATIVE_EPS * scale(&smoothed);
    let n = smoothed.len();
    let d = smoothed[n - 1] - smoothed[n - 2];
    let final_slope = if d > eps {
        Slope::Rising
    } else if d < -eps {
        Slope::Falling
    } else {
        Slope::Flat
    };
    BehaviorSignature {
        local_maxima: local_maxima(&smoothed).len(),
        final_slope,
        onset,
    }
}

/// Time of the largest value (the first one on ties).
pub fn peak_time(times: &[f64], values: &[f64]) -> Option<f64> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| times[i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn times(n: usize) -> Vec<f64> {
        (0..n).map(|i| 2015.0 + 0.25 * i as f64).collect()
    }

    #[test]
    fn growth_peak_decline() {
        let v: Vec<f64> = (0..81)
            .map(|i| (-((i as f64 - 40.0) / 15.0).powi(2)).exp())
            .collect();
        let s = classify(&times(81), &v);
        assert_eq!(s.local_maxima, 1);
        assert_eq!(s.final_slope, Slope::Falling);
        assert_eq!(s.onset, Some(2015.0));
    }

    #[test]
    fn monotone_growth_and_late_onset() {
        let v: Vec<f64> = (0..81)
            .map(|i| if i < 30 { 0.0 } else { (i - 30) as f64 })
            .collect();
        let s = classify(&times(81), &v);
        assert_eq!(s.local_maxima, 0);
        assert_eq!(s.final_slope, Slope::Rising);
        assert_eq!(s.onset, Some(2022.75));
    }

    #[test]
    fn plateau_counts_once() {
        assert_eq!(local_maxima(&[0.0, 1.0, 2.0, 2.0, 2.0, 1.0, 0.0]), vec![2]);
        assert!(local_maxima(&[0.0, 1.0, 2.0, 2.0]).is_empty());
        assert!(local_maxima(&[3.0, 3.0, 3.0]).is_empty());
    }

    #[test]
    fn onset_tolerance() {
        let a = BehaviorSignature {
            local_maxima: 0,
            final_slope: Slope::Rising,
            onset: Some(2024.0),
        };
        let b = BehaviorSignature {
            onset: Some(2026.0),
            ..a
        };
        let c = BehaviorSignature {
            onset: Some(2026.25),
            ..a
        };
        let none = BehaviorSignature { onset: None, ..a };
        assert!(a.matches(&b, 2.0));
        assert!(!a.matches(&c, 2.0));
        assert!(!a.matches(&none, 2.0));
        assert!(none.matches(&none, 2.0));
    }

    #[test]
    fn peak_time_first_on_ties() {
        assert_eq!(peak_time(&[1.0, 2.0, 3.0], &[1.0, 5.0, 5.0]), Some(2.0));
        assert_eq!(peak_time(&[], &[]), None);
    }

    proptest! {
        #[test]
        fn invariant_to_positive_scaling(
            v in prop::collection::vec(0.0f64..1e4, 3..60),
            k in 1e-6f64..1e6,
        ) {
            let t = times(v.len());
            let scaled: Vec<f64> = v.iter().map(|x| x * k).collect();
            prop_assert_eq!(classify(&t, &v), classify(&t, &scaled));
        }
    }
}
