//! Min-max scaling onto a target range.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationState {
    pub data_min: f64,
    pub data_max: f64,
    pub target_lo: f64,
    pub target_hi: f64,
}

impl NormalizationState {
    /// Fit on `series`; a series without two distinct values is rejected.
    pub fn fit(series: &[f64], target: (f64, f64)) -> Result<Self> {
        Self::check_target(target)?;
        let (lo, hi) = min_max(series)?;
        if hi <= lo {
            return Err(Error::DegenerateRange(lo));
        }
        Ok(Self { data_min: lo, data_max: hi, target_lo: target.0, target_hi: target.1 })
    }

    /// Fit, widening the data range symmetrically to at least `min_span` so
    /// that constant stretches (a vehicle cruising at fixed speed) stay usable.
    pub fn fit_padded(series: &[f64], target: (f64, f64), min_span: f64) -> Result<Self> {
        Self::check_target(target)?;
        if !(min_span > 0.0) {
            return Err(Error::Parameter(format!("min_span must be positive, got {min_span}")));
        }
        let (mut lo, mut hi) = min_max(series)?;
        let span = hi - lo;
        if span < min_span {
            let pad = 0.5 * (min_span - span);
            lo -= pad;
            hi += pad;
        }
        Ok(Self { data_min: lo, data_max: hi, target_lo: target.0, target_hi: target.1 })
    }

    fn check_target(target: (f64, f64)) -> Result<()> {
        if !(target.0 < target.1) || !target.0.is_finite() || !target.1.is_finite() {
            return Err(Error::Parameter(format!("target range {target:?} must be increasing and finite")));
        }
        Ok(())
    }

    fn scale(&self) -> f64 {
        (self.target_hi - self.target_lo) / (self.data_max - self.data_min)
    }

    pub fn transform(&self, value: f64) -> f64 {
        self.target_lo + (value - self.data_min) * self.scale()
    }

    pub fn inverse(&self, value: f64) -> f64 {
        self.data_min + (value - self.target_lo) / self.scale()
    }

    pub fn transform_all(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|&v| self.transform(v)).collect()
    }

    pub fn inverse_all(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|&v| self.inverse(v)).collect()
    }
}

fn min_max(series: &[f64]) -> Result<(f64, f64)> {
    if series.is_empty() {
        return Err(Error::Contract("cannot normalize an empty series".into()));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::Contract("cannot normalize a series with non-finite values".into()));
    }
    Ok(series.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v))))
}
