//! Fit statistics against observed data and structural behavior tests.

mod behavior;
mod historical;
mod metrics;
mod suites;

pub use behavior::{classify, local_maxima, peak_time, smooth3, BehaviorSignature, Slope};
pub use historical::{load_historical, read_historical, HistoricalSeries};
pub use metrics::{error_metrics, theil_decomposition, ErrorReport, Moments, TheilComponents};
pub use suites::{
    all_passed, extreme_condition_suite, sensitivity_suite, step_convergence, Finding,
    PerturbationSet, SensitivityReport, Status, CONVERGENCE_TOLERANCE, EXTREME_INITIAL_DEBT,
    NEAR_ZERO_TENDENCY, ONSET_TOLERANCE, SENSITIVITY_VARIABLES,
};
