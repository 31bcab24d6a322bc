use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inverted sigmoid `y_max / (1 + (x / x_50)^p)`.
///
/// Maps a non-negative stressor to an attenuation that starts at `y_max`
/// for `x = 0`, halves at `x = x_50`, and decays towards zero beyond it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidEffect {
    y_max: f64,
    x_50: f64,
    p: f64,
}

impl SigmoidEffect {
    pub fn new(y_max: f64, x_50: f64, p: f64) -> Result<Self> {
        for (name, value) in [("y_max", y_max), ("x_50", x_50), ("p", p)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invariant(
                    name,
                    format!("must be finite and > 0, got {value}"),
                ));
            }
        }
        Ok(Self { y_max, x_50, p })
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn x_50(&self) -> f64 {
        self.x_50
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::input(
                "x",
                format!("sigmoid input must be finite, got {x}"),
            ));
        }
        if x < 0.0 {
            return Err(Error::input(
                "x",
                format!("sigmoid input must be >= 0, got {x}"),
            ));
        }
        Ok(self.y_max / (1.0 + (x / self.x_50).powf(self.p)))
    }
}
