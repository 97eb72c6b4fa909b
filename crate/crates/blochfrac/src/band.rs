//! Two-sided bands of grid-sampled ratios.

use serde::Serialize;

/// A positive quantity sampled along a grid, together with its extremes.
///
/// Overflowed samples are clamped to `f64::MAX` and flagged rather than
/// poisoning the band; `truncated` records that the sweep stopped before the
/// end of the requested grid (tail underflow or an overflow cut).
#[derive(Clone, Debug, Serialize)]
pub struct RatioBand {
    /// Grid coordinate of each sample (a radius or an exponent).
    pub keys: Vec<f64>,
    pub values: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub argmin: f64,
    pub argmax: f64,
    pub truncated: bool,
    pub clamped: bool,
}

impl RatioBand {
    pub fn from_rows(keys: Vec<f64>, values: Vec<f64>, truncated: bool) -> Self {
        assert_eq!(keys.len(), values.len());
        let mut clamped = false;
        let values: Vec<f64> = values
            .into_iter()
            .map(|v| {
                if v.is_finite() {
                    v
                } else {
                    clamped = true;
                    f64::MAX
                }
            })
            .collect();
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut argmin = f64::NAN;
        let mut argmax = f64::NAN;
        for (k, v) in keys.iter().zip(&values) {
            if *v < min {
                min = *v;
                argmin = *k;
            }
            if *v > max {
                max = *v;
                argmax = *k;
            }
        }
        if values.is_empty() {
            min = f64::NAN;
            max = f64::NAN;
        }
        RatioBand {
            keys,
            values,
            min,
            max,
            argmin,
            argmax,
            truncated,
            clamped,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// max/min spread; meaningful only when min > 0.
    pub fn spread(&self) -> f64 {
        self.max / self.min
    }

    /// Largest relative disagreement between the two bands' extremes.
    /// Symmetric in its arguments; exact zeros on both sides count as agreeing.
    pub fn drift_from(&self, other: &RatioBand) -> f64 {
        fn one(a: f64, b: f64) -> f64 {
            if a == b {
                0.0
            } else {
                (a - b).abs() / a.abs().max(b.abs())
            }
        }
        one(self.min, other.min).max(one(self.max, other.max))
    }
}
