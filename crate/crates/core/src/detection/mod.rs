//! Two-stage attack detection: a gap-difference comparator backed by online
//! ELM predictors of every vehicle's position and velocity.
//!
//! Each control step the detector sees the measured platoon state. Per vehicle
//! it predicts position and velocity from the previous `lag` observations and
//! reports deviations above a threshold; per interior follower it compares
//! the front and rear gaps. If anything fires, every model is frozen for that
//! step, so observations taken while the platoon may be under attack never
//! enter a training set; otherwise each model refits on its rolling window of
//! benign observations.

mod elm;
mod normalize;

use std::collections::VecDeque;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use elm::{sliding_window, ElmModel};
pub use normalize::NormalizationState;

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::model::PlatoonState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComparatorConfig {
    /// Allowed |front gap − rear gap − nominal_diff| (m).
    pub threshold: f64,
    /// Expected front-minus-rear gap difference in benign operation (m).
    pub nominal_diff: f64,
}

impl Default for ComparatorConfig {
    fn default() -> Self {
        Self { threshold: 2.0, nominal_diff: 0.0 }
    }
}

/// Flag when the ego's front and rear gaps differ from the nominal
/// difference by more than the threshold.
pub fn comparator_check(gap_front: f64, gap_rear: f64, nominal_diff: f64, config: &ComparatorConfig) -> bool {
    ((gap_front - gap_rear) - nominal_diff).abs() > config.threshold
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElmConfig {
    pub hidden: usize,
    pub lag: usize,
    pub step_forward: usize,
    pub ridge: f64,
    pub target_lo: f64,
    pub target_hi: f64,
    /// Number of most recent benign observations used for normalization and
    /// training.
    pub window: usize,
    /// Minimum data span of the normalization (channel units).
    pub min_span: f64,
    /// Re-level the position input window so its newest value coincides
    /// with the newest training observation (and shift the prediction back).
    /// A no-op while nothing is flagged; during a freeze it keeps the trend
    /// model inside its training range instead of extrapolating a drifting
    /// level.
    pub anchor_position: bool,
}

impl Default for ElmConfig {
    fn default() -> Self {
        Self {
            hidden: 50,
            lag: 2,
            step_forward: 1,
            ridge: 1e-6,
            target_lo: 0.0,
            target_hi: 1.0,
            window: 200,
            min_span: 1.0,
            anchor_position: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionConfig {
    pub comparator: ComparatorConfig,
    pub elm: ElmConfig,
    /// Position anomaly threshold (m).
    pub position_threshold: f64,
    /// Velocity anomaly threshold (m/s).
    pub velocity_threshold: f64,
    /// Control steps with detection suppressed; defaults to `lag + 10`.
    pub warmup: Option<usize>,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            comparator: ComparatorConfig::default(),
            elm: ElmConfig::default(),
            position_threshold: 2.5,
            velocity_threshold: 2.0,
            warmup: None,
        }
    }
}

impl DetectionConfig {
    pub fn warmup_steps(&self) -> usize {
        self.warmup.unwrap_or(self.elm.lag + 10)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("detection: {msg}")));
        if !(self.comparator.threshold > 0.0) || !self.comparator.nominal_diff.is_finite() {
            return bad("comparator threshold must be positive");
        }
        if !(self.position_threshold > 0.0) || !(self.velocity_threshold > 0.0) {
            return bad("anomaly thresholds must be positive");
        }
        let e = &self.elm;
        if e.hidden == 0 || e.lag == 0 || e.step_forward == 0 {
            return bad("hidden, lag and step_forward must be at least 1");
        }
        if e.window < e.lag + e.step_forward {
            return bad("window must hold at least one training pair");
        }
        if !(e.target_lo < e.target_hi) || !(e.ridge >= 0.0) || !(e.min_span > 0.0) {
            return bad("need target_lo < target_hi, ridge >= 0 and min_span > 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnomalyKind {
    PosAnom,
    VelAnom,
}

impl AnomalyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AnomalyKind::PosAnom => "PosAnom",
            AnomalyKind::VelAnom => "VelAnom",
        }
    }
}

impl fmt::Display for AnomalyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AnomalyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "PosAnom" => Ok(AnomalyKind::PosAnom),
            "VelAnom" => Ok(AnomalyKind::VelAnom),
            other => Err(Error::Format(format!("unknown anomaly type {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnomalyEvent {
    pub kind: AnomalyKind,
    pub control_step: usize,
    pub vehicle: usize,
    pub actual: f64,
    pub predicted: f64,
}

/// An event iff `|actual − predicted|` strictly exceeds `threshold`.
pub fn detect_anomaly(
    kind: AnomalyKind,
    control_step: usize,
    vehicle: usize,
    actual: f64,
    predicted: f64,
    threshold: f64,
) -> Option<AnomalyEvent> {
    ((actual - predicted).abs() > threshold).then_some(AnomalyEvent { kind, control_step, vehicle, actual, predicted })
}

pub const ANOMALY_HEADER: [&str; 5] = ["anomaly_type", "control_step", "vehicle_no", "actual_value", "predicted_value"];

pub fn write_anomalies<W: Write>(events: &[AnomalyEvent], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(ANOMALY_HEADER)?;
    for e in events {
        w.write_record([
            e.kind.as_str().to_string(),
            e.control_step.to_string(),
            e.vehicle.to_string(),
            e.actual.to_string(),
            e.predicted.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_anomalies<R: Read>(reader: R) -> Result<Vec<AnomalyEvent>> {
    let mut r = csv::Reader::from_reader(reader);
    if r.headers()?.iter().ne(ANOMALY_HEADER) {
        return Err(Error::Format(format!("anomaly header must be {}", ANOMALY_HEADER.join(","))));
    }
    let parse = |s: &str, what: &str| s.parse::<f64>().map_err(|e| Error::Format(format!("{what} {s:?}: {e}")));
    let parse_n = |s: &str, what: &str| s.parse::<usize>().map_err(|e| Error::Format(format!("{what} {s:?}: {e}")));
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok(AnomalyEvent {
                kind: rec[0].parse()?,
                control_step: parse_n(&rec[1], "control_step")?,
                vehicle: parse_n(&rec[2], "vehicle_no")?,
                actual: parse(&rec[3], "actual_value")?,
                predicted: parse(&rec[4], "predicted_value")?,
            })
        })
        .collect()
}

/// Online predictor of one scalar series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesDetector {
    pub model: ElmModel,
    pub normalization: Option<NormalizationState>,
    trained: bool,
    /// Last `lag` observations, benign or not: the prediction input.
    recent: VecDeque<(usize, f64)>,
    /// Last `window` benign observations: the training data.
    benign: VecDeque<(usize, f64)>,
    config: ElmConfig,
    anchored: bool,
    /// Newest value that served as a training target.
    last_target: Option<f64>,
}

impl SeriesDetector {
    /// `anchored` selects level anchoring of the input window.
    pub fn new(config: &ElmConfig, anchored: bool, rng: &mut ChaCha8Rng) -> Result<Self> {
        Ok(Self {
            model: ElmModel::new(config.hidden, config.lag, config.step_forward, config.ridge, rng)?,
            normalization: None,
            trained: false,
            recent: VecDeque::with_capacity(config.lag + 1),
            benign: VecDeque::with_capacity(config.window + 1),
            config: config.clone(),
            anchored,
            last_target: None,
        })
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    /// Training observations currently held, oldest first.
    pub fn training_observations(&self) -> impl Iterator<Item = &(usize, f64)> {
        self.benign.iter()
    }

    /// Prediction for the step after the last observation; `None` until the
    /// model has been fitted or while the input window is incomplete.
    pub fn predict(&self) -> Result<Option<f64>> {
        let (Some(norm), true) = (self.normalization, self.trained) else {
            return Ok(None);
        };
        if self.recent.len() < self.config.lag {
            return Ok(None);
        }
        let shift = match (self.anchored, self.recent.back(), self.last_target) {
            (true, Some(&(_, newest)), Some(trained)) => newest - trained,
            _ => 0.0,
        };
        let window: Vec<f64> = self.recent.iter().map(|&(_, v)| norm.transform(v - shift)).collect();
        Ok(Some(norm.inverse(self.model.predict(&window)?) + shift))
    }

    /// Record the observation of `step`. Under an attack flag the model is
    /// frozen and the observation is kept only as prediction input;
    /// otherwise the model is unfrozen and refitted with it.
    pub fn update_or_freeze(&mut self, step: usize, value: f64, attack_flag: bool) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::numerical(format!("non-finite observation {value} at step {step}")));
        }
        if let Some(&(last, _)) = self.recent.back() {
            if step != last + 1 {
                return Err(Error::Contract(format!("observation for step {step} after step {last}")));
            }
        }
        self.recent.push_back((step, value));
        if self.recent.len() > self.config.lag {
            self.recent.pop_front();
        }
        if attack_flag {
            self.model.frozen = true;
            return Ok(());
        }
        self.model.frozen = false;
        self.benign.push_back((step, value));
        if self.benign.len() > self.config.window {
            self.benign.pop_front();
        }
        self.refit()
    }

    fn refit(&mut self) -> Result<()> {
        let values: Vec<f64> = self.benign.iter().map(|&(_, v)| v).collect();
        let norm = NormalizationState::fit_padded(
            &values,
            (self.config.target_lo, self.config.target_hi),
            self.config.min_span,
        )?;
        // training pairs only from runs of consecutive steps
        let (mut inputs, mut targets) = (Vec::new(), Vec::new());
        let mut last_target = None;
        let mut run_start = 0;
        for i in 1..=self.benign.len() {
            let run_ends = i == self.benign.len() || self.benign[i].0 != self.benign[i - 1].0 + 1;
            if run_ends {
                let run = norm.transform_all(&values[run_start..i]);
                if run.len() >= self.config.lag + self.config.step_forward {
                    let (x, y) = sliding_window(&run, self.config.lag, self.config.step_forward)?;
                    inputs.extend(x);
                    targets.extend(y);
                    last_target = Some(values[i - 1]);
                }
                run_start = i;
            }
        }
        self.normalization = Some(norm);
        if !inputs.is_empty() {
            self.model.fit(&inputs, &targets)?;
            self.trained = true;
            self.last_target = last_target;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleDetector {
    pub position: SeriesDetector,
    pub velocity: SeriesDetector,
}

/// Measured platoon quantities at one control step; index 0 is the leader.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub control_step: usize,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl Observation {
    pub fn from_platoon(p: &PlatoonState) -> Self {
        Self {
            control_step: p.control_step,
            x: p.vehicles().map(|s| s.x).collect(),
            v: p.vehicles().map(|s| s.v).collect(),
        }
    }

    pub fn gap_front(&self, idx: usize) -> f64 {
        self.x[idx - 1] - self.x[idx]
    }
}

/// Detector output for one control step; vectors are indexed by vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDetection {
    pub control_step: usize,
    pub comparator_flags: Vec<bool>,
    pub position_predictions: Vec<Option<f64>>,
    pub velocity_predictions: Vec<Option<f64>>,
    pub events: Vec<AnomalyEvent>,
    /// Comparator or ELM fired somewhere in the platoon.
    pub attack_flag: bool,
}

impl StepDetection {
    pub fn has_event(&self, vehicle: usize, kind: AnomalyKind) -> bool {
        self.events.iter().any(|e| e.vehicle == vehicle && e.kind == kind)
    }
}

/// Detector state of a whole platoon.
#[derive(Debug, Clone)]
pub struct PlatoonDetector {
    pub config: DetectionConfig,
    pub vehicles: Vec<VehicleDetector>,
    mode: ExecMode,
}

impl PlatoonDetector {
    /// `vehicle_count` includes the leader. Every model gets its own ChaCha
    /// stream of `seed`, so weights depend only on the seed and the slot.
    pub fn new(config: DetectionConfig, vehicle_count: usize, seed: u64, mode: ExecMode) -> Result<Self> {
        config.validate()?;
        let series = |stream: u64, anchored: bool| -> Result<SeriesDetector> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            SeriesDetector::new(&config.elm, anchored, &mut rng)
        };
        let anchor = config.elm.anchor_position;
        let vehicles = (0..vehicle_count as u64)
            .map(|i| {
                Ok(VehicleDetector { position: series(2 * i, anchor)?, velocity: series(2 * i + 1, false)? })
            })
            .collect::<Result<_>>()?;
        Ok(Self { config, vehicles, mode })
    }

    pub fn detect_step(&mut self, obs: &Observation) -> Result<StepDetection> {
        let count = self.vehicles.len();
        if obs.x.len() != count || obs.v.len() != count {
            return Err(Error::Contract(format!(
                "observation has {}/{} entries for {count} vehicles",
                obs.x.len(),
                obs.v.len()
            )));
        }
        let active = obs.control_step >= self.config.warmup_steps();
        let predictions = exec::map(self.mode, &self.vehicles, |d| -> Result<_> {
            Ok((d.position.predict()?, d.velocity.predict()?))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

        let mut events = Vec::new();
        if active {
            for (i, &(pos, vel)) in predictions.iter().enumerate() {
                let k = obs.control_step;
                if let Some(p) = pos {
                    events.extend(detect_anomaly(AnomalyKind::PosAnom, k, i, obs.x[i], p, self.config.position_threshold));
                }
                if let Some(p) = vel {
                    events.extend(detect_anomaly(AnomalyKind::VelAnom, k, i, obs.v[i], p, self.config.velocity_threshold));
                }
            }
        }
        let comparator_flags: Vec<bool> = (0..count)
            .map(|i| {
                active
                    && i >= 1
                    && i + 1 < count
                    && comparator_check(
                        obs.gap_front(i),
                        obs.gap_front(i + 1),
                        self.config.comparator.nominal_diff,
                        &self.config.comparator,
                    )
            })
            .collect();
        let attack_flag = !events.is_empty() || comparator_flags.iter().any(|&f| f);

        let k = obs.control_step;
        exec::map_mut(self.mode, &mut self.vehicles, |i, d| -> Result<()> {
            d.position.update_or_freeze(k, obs.x[i], attack_flag)?;
            d.velocity.update_or_freeze(k, obs.v[i], attack_flag)
        })
        .into_iter()
        .collect::<Result<()>>()?;

        Ok(StepDetection {
            control_step: k,
            comparator_flags,
            position_predictions: predictions.iter().map(|p| p.0).collect(),
            velocity_predictions: predictions.iter().map(|p| p.1).collect(),
            events,
            attack_flag,
        })
    }
}
