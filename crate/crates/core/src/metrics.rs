//! Time-headway and acceleration diagnostics and attack-impact classification.

use std::io::Write;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Safe time-headway band and benign acceleration range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub safe_lo: f64,
    pub safe_hi: f64,
    pub accel_lo: f64,
    pub accel_hi: f64,
    /// Leading control steps excluded from classification.
    pub warmup: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self { safe_lo: 0.45, safe_hi: 0.55, accel_lo: -1.5, accel_hi: 1.0, warmup: 10 }
    }
}

/// Bumper-to-bumper time headway `(gap − L) / v`; `None` when `v ≤ 0`.
pub fn time_headway(gap: f64, v: f64, vehicle_length: f64) -> Option<f64> {
    (v > 0.0).then(|| (gap - vehicle_length) / v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    None,
    SafetyDegradation,
    EfficiencyDegradation,
    StringInstability,
}

/// Classify one headway series: undefined entries and the first `warmup`
/// entries are ignored.
pub fn classify_series(series: &[Option<f64>], safe_lo: f64, safe_hi: f64, warmup: usize) -> Classification {
    let defined = || series.iter().skip(warmup).flatten();
    let below = defined().any(|&h| h < safe_lo);
    let above = defined().any(|&h| h > safe_hi);
    match (below, above) {
        (false, false) => Classification::None,
        (true, false) => Classification::SafetyDegradation,
        (false, true) => Classification::EfficiencyDegradation,
        (true, true) => Classification::StringInstability,
    }
}

/// Per-vehicle classification.
pub fn classify_impact(
    headways: &[Vec<Option<f64>>],
    safe_lo: f64,
    safe_hi: f64,
    warmup: usize,
) -> Vec<Classification> {
    headways.iter().map(|s| classify_series(s, safe_lo, safe_hi, warmup)).collect()
}

/// Maximal runs of indices whose acceleration lies outside `[lo, hi]`.
/// Indices are positions in `accel`, i.e. control steps when the series
/// starts at step 0.
pub fn acceleration_envelope(accel: &[f64], lo: f64, hi: f64) -> Vec<RangeInclusive<usize>> {
    let mut out = Vec::new();
    let mut start = None;
    for (k, &u) in accel.iter().enumerate() {
        let outside = !(lo..=hi).contains(&u);
        match (outside, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                out.push(s..=k - 1);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(s..=accel.len() - 1);
    }
    out
}

/// Diagnostics of one follower.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VehicleImpact {
    pub vehicle: usize,
    pub classification: Classification,
    pub min_headway: Option<f64>,
    pub max_headway: Option<f64>,
    /// Control-step intervals `[start, end]` with acceleration outside the
    /// benign range.
    pub acceleration_violations: Vec<[usize; 2]>,
}

/// Impact report over a completed run. Series index `j` is control step `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpactReport {
    pub config: MetricsConfig,
    /// `headways[i][k]`: follower `i + 1` at step `k`.
    pub headways: Vec<Vec<Option<f64>>>,
    pub accelerations: Vec<Vec<f64>>,
    pub vehicles: Vec<VehicleImpact>,
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    safe_lo: f64,
    safe_hi: f64,
    accel_lo: f64,
    accel_hi: f64,
    warmup: usize,
    control_steps: usize,
    vehicle: &'a [VehicleImpact],
}

impl ImpactReport {
    pub fn new(config: MetricsConfig, headways: Vec<Vec<Option<f64>>>, accelerations: Vec<Vec<f64>>) -> Self {
        let classes = classify_impact(&headways, config.safe_lo, config.safe_hi, config.warmup);
        let vehicles = headways
            .iter()
            .zip(&accelerations)
            .zip(classes)
            .enumerate()
            .map(|(i, ((h, a), classification))| {
                let after: Vec<f64> = h.iter().skip(config.warmup).flatten().copied().collect();
                VehicleImpact {
                    vehicle: i + 1,
                    classification,
                    min_headway: after.iter().copied().reduce(f64::min),
                    max_headway: after.iter().copied().reduce(f64::max),
                    acceleration_violations: acceleration_envelope(a, config.accel_lo, config.accel_hi)
                        .into_iter()
                        .map(|r| [*r.start(), *r.end()])
                        .collect(),
                }
            })
            .collect();
        Self { config, headways, accelerations, vehicles }
    }

    pub fn classifications(&self) -> Vec<Classification> {
        self.vehicles.iter().map(|v| v.classification).collect()
    }

    /// Classification of follower `vehicle` (1-based).
    pub fn classification(&self, vehicle: usize) -> Classification {
        self.vehicles[vehicle - 1].classification
    }

    /// Structured text (TOML) summary.
    pub fn to_toml(&self) -> String {
        let doc = ReportDoc {
            safe_lo: self.config.safe_lo,
            safe_hi: self.config.safe_hi,
            accel_lo: self.config.accel_lo,
            accel_hi: self.config.accel_hi,
            warmup: self.config.warmup,
            control_steps: self.headways.first().map_or(0, Vec::len),
            vehicle: &self.vehicles,
        };
        toml::to_string(&doc).expect("report document is always serializable")
    }

    /// Plot-ready rows: `control_step,vehicle,headway,acceleration,safe_lo,safe_hi`.
    /// An undefined headway is written as an empty field.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["control_step", "vehicle", "headway", "acceleration", "safe_lo", "safe_hi"])?;
        let steps = self.headways.first().map_or(0, Vec::len);
        for k in 0..steps {
            for (i, (h, a)) in self.headways.iter().zip(&self.accelerations).enumerate() {
                w.write_record([
                    k.to_string(),
                    (i + 1).to_string(),
                    h[k].map(|h| h.to_string()).unwrap_or_default(),
                    a[k].to_string(),
                    self.config.safe_lo.to_string(),
                    self.config.safe_hi.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
