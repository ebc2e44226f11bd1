//! End-to-end runs: per control step bias generation, message exchange with
//! injection, optimization, plant update, detection and metric accumulation,
//! followed by the trace, anomaly and impact artifacts.
//!
//! Trace row `j` of a vehicle is its state after `j` control steps; `u` is the
//! acceleration that produced it (0 in row 0). Detection runs on every
//! snapshot, so an attack injected during control step `k` can first show up
//! in row `k + 1`.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::attack::{iter_attack_value_cal, parse_attack_case, precompute_bias, AttackCase, BiasMatrices};
use crate::channel::{ChannelId, V2vChannel};
use crate::controller::{check_constraints, run_control_step, ConstraintViolation, IterationRecord};
use crate::detection::{write_anomalies, AnomalyEvent, AnomalyKind, DetectionConfig, Observation, PlatoonDetector, StepDetection};
use crate::dynamics::step_platoon;
use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::metrics::{time_headway, ImpactReport};
use crate::model::{initial_platoon, PlatoonState};
use crate::scenario::Scenario;

pub const TRACE_HEADER: [&str; 12] = [
    "control_step",
    "vehicle_id",
    "x",
    "v",
    "u",
    "gap_front",
    "headway",
    "comparator_flag",
    "elm_pos_pred",
    "elm_vel_pred",
    "pos_anom",
    "vel_anom",
];

pub const TRACE_FILE: &str = "trace.csv";
pub const ANOMALY_FILE: &str = "anomalies.csv";
pub const REPORT_FILE: &str = "report.toml";
pub const IMPACT_FILE: &str = "impact.csv";

/// One vehicle at one snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub control_step: usize,
    /// 0 is the leader.
    pub vehicle_id: usize,
    pub x: f64,
    pub v: f64,
    pub u: f64,
    pub gap_front: Option<f64>,
    pub headway: Option<f64>,
    pub comparator_flag: bool,
    pub elm_pos_pred: Option<f64>,
    pub elm_vel_pred: Option<f64>,
    pub pos_anom: bool,
    pub vel_anom: bool,
}

/// Controller diagnostics of one control step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub control_step: usize,
    pub iterations_used: usize,
    pub converged: bool,
    /// Any attack period active in this step.
    pub attacked: bool,
    pub leader_u: f64,
    pub u_next: Vec<f64>,
    /// Constraint check of the applied accelerations.
    pub violations: Vec<ConstraintViolation>,
    /// Per-iteration diagnostics of the primal/dual loop.
    pub log: Vec<IterationRecord>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub steps: Vec<StepRecord>,
    /// Snapshots `0..=total_control_steps`.
    pub states: Vec<PlatoonState>,
    pub detections: Vec<StepDetection>,
    pub trace: Vec<TraceRow>,
    pub events: Vec<AnomalyEvent>,
    pub report: ImpactReport,
}

impl RunResult {
    /// Snapshots holding at least one ELM anomaly.
    pub fn anomalous_steps(&self) -> Vec<usize> {
        self.detections.iter().filter(|d| !d.events.is_empty()).map(|d| d.control_step).collect()
    }

    pub fn comparator_steps(&self) -> Vec<usize> {
        self.detections
            .iter()
            .filter(|d| d.comparator_flags.iter().any(|&f| f))
            .map(|d| d.control_step)
            .collect()
    }

    pub fn flagged_steps(&self) -> Vec<usize> {
        self.detections.iter().filter(|d| d.attack_flag).map(|d| d.control_step).collect()
    }
}

fn trace_rows(state: &PlatoonState, det: &StepDetection, vehicle_length: f64) -> Vec<TraceRow> {
    state
        .vehicles()
        .enumerate()
        .map(|(i, s)| {
            let gap_front = (i > 0).then(|| state.gap_front(i));
            TraceRow {
                control_step: state.control_step,
                vehicle_id: i,
                x: s.x,
                v: s.v,
                u: s.u,
                gap_front,
                headway: gap_front.and_then(|g| time_headway(g, s.v, vehicle_length)),
                comparator_flag: det.comparator_flags[i],
                elm_pos_pred: det.position_predictions[i],
                elm_vel_pred: det.velocity_predictions[i],
                pos_anom: det.has_event(i, AnomalyKind::PosAnom),
                vel_anom: det.has_event(i, AnomalyKind::VelAnom),
            }
        })
        .collect()
}

/// Simulate `scenario` in memory. `mode` selects how bias precomputation and
/// per-vehicle detector updates run; results do not depend on it.
pub fn run_scenario(scenario: &Scenario, mode: ExecMode) -> Result<RunResult> {
    scenario.validate()?;
    let cfg = &scenario.sim;
    let n = cfg.n;
    let steps = cfg.total_control_steps;
    let case = scenario.attack_case()?;
    let biases = if case.is_benign() {
        Vec::new()
    } else {
        precompute_bias(n, steps, cfg.max_iterations, &case, mode)
    };

    let mut platoon = initial_platoon(cfg, scenario.leader.initial_speed)?;
    let mut channel = V2vChannel::new(n, cfg.max_iterations).with_drops(scenario.drops.clone());
    let mut detector = PlatoonDetector::new(scenario.detection.clone(), n + 1, scenario.seed, mode)?;

    let first = detector.detect_step(&Observation::from_platoon(&platoon))?;
    let mut trace = trace_rows(&platoon, &first, cfg.vehicle_length);
    let mut events = first.events.clone();
    let mut detections = vec![first];
    let mut states = vec![platoon.clone()];
    let mut records = Vec::with_capacity(steps);

    for k in 0..steps {
        let bias = biases.get(k).cloned().unwrap_or_else(|| BiasMatrices::zeros(cfg.max_iterations, n));
        channel.set_step(k, bias);
        let leader_u = scenario.leader.segments.acceleration_at(k);
        let outcome = run_control_step(&platoon, leader_u, &mut channel, cfg).map_err(|e| e.at_step(k))?;
        let violations = check_constraints(&outcome.u_next, leader_u, &platoon, cfg);
        platoon = step_platoon(&platoon, leader_u, &outcome.u_next, cfg.tau).map_err(|e| e.at_step(k))?;
        if platoon.vehicles().any(|s| !s.x.is_finite() || !s.v.is_finite()) {
            return Err(Error::Numerical { step: Some(k), message: "platoon state is not finite".into() });
        }
        let det = detector.detect_step(&Observation::from_platoon(&platoon)).map_err(|e| e.at_step(k))?;
        trace.extend(trace_rows(&platoon, &det, cfg.vehicle_length));
        events.extend(det.events.iter().copied());
        detections.push(det);
        states.push(platoon.clone());
        records.push(StepRecord {
            control_step: k,
            iterations_used: outcome.iterations_used,
            converged: outcome.converged,
            attacked: case.is_attacked_at(k),
            leader_u,
            u_next: outcome.u_next,
            violations,
            log: outcome.log,
        });
    }

    let headways = (1..=n)
        .map(|i| trace.iter().filter(|r| r.vehicle_id == i).map(|r| r.headway).collect())
        .collect();
    let accelerations = (1..=n)
        .map(|i| trace.iter().filter(|r| r.vehicle_id == i).map(|r| r.u).collect())
        .collect();
    let report = ImpactReport::new(scenario.metrics.clone(), headways, accelerations);
    Ok(RunResult { steps: records, states, detections, trace, events, report })
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn write_trace<W: Write>(rows: &[TraceRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TRACE_HEADER)?;
    for r in rows {
        w.write_record([
            r.control_step.to_string(),
            r.vehicle_id.to_string(),
            r.x.to_string(),
            r.v.to_string(),
            r.u.to_string(),
            opt(r.gap_front),
            opt(r.headway),
            flag(r.comparator_flag).to_string(),
            opt(r.elm_pos_pred),
            opt(r.elm_vel_pred),
            flag(r.pos_anom).to_string(),
            flag(r.vel_anom).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Write the artifacts enabled in `scenario.output` into `dir`.
pub fn write_artifacts(result: &RunResult, scenario: &Scenario, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let out = &scenario.output;
    if out.trace {
        write_trace(&result.trace, create(dir, TRACE_FILE)?)?;
    }
    if out.anomalies {
        write_anomalies(&result.events, create(dir, ANOMALY_FILE)?)?;
    }
    if out.report {
        std::fs::write(dir.join(REPORT_FILE), result.report.to_toml())?;
    }
    if out.impact_csv {
        result.report.write_csv(create(dir, IMPACT_FILE)?)?;
    }
    Ok(())
}

/// Run and write artifacts.
pub fn run_to_dir(scenario: &Scenario, dir: &Path, mode: ExecMode) -> Result<RunResult> {
    let result = run_scenario(scenario, mode)?;
    write_artifacts(&result, scenario, dir)?;
    Ok(result)
}

/// Observations reconstructed from a trace: snapshots in order, vehicles by id.
pub fn read_trace_observations<R: Read>(reader: R) -> Result<Vec<Observation>> {
    let mut r = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let headers = match r.headers() {
        Ok(h) => h.clone(),
        Err(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => return Err(e.into()),
        Err(e) => return Err(Error::Format(e.to_string())),
    };
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("trace lacks column {name:?}")))
    };
    let (ks, ids, xs, vs) = (col("control_step")?, col("vehicle_id")?, col("x")?, col("v")?);
    let mut out: Vec<Observation> = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        let field = |c: usize| -> Result<&str> { Ok(rec.get(c).unwrap_or_default()) };
        let num = |c: usize| -> Result<f64> {
            let s = field(c)?;
            s.parse().map_err(|_| Error::Format(format!("row {}: bad number {s:?}", line + 2)))
        };
        let idx = |c: usize| -> Result<usize> {
            let s = field(c)?;
            s.parse().map_err(|_| Error::Format(format!("row {}: bad index {s:?}", line + 2)))
        };
        let (k, id) = (idx(ks)?, idx(ids)?);
        if out.last().map_or(true, |o| o.control_step != k) {
            out.push(Observation { control_step: k, x: Vec::new(), v: Vec::new() });
        }
        let obs = out.last_mut().expect("pushed above");
        if id != obs.x.len() {
            return Err(Error::Format(format!("row {}: vehicle {id} out of order at step {k}", line + 2)));
        }
        obs.x.push(num(xs)?);
        obs.v.push(num(vs)?);
    }
    if let Some(first) = out.first() {
        let count = first.x.len();
        if out.iter().any(|o| o.x.len() != count) {
            return Err(Error::Format("snapshots list different vehicle counts".into()));
        }
    }
    Ok(out)
}

/// Re-run detection on recorded observations.
pub fn replay_detect(observations: &[Observation], config: &DetectionConfig, seed: u64, mode: ExecMode) -> Result<Vec<AnomalyEvent>> {
    let Some(first) = observations.first() else {
        return Ok(Vec::new());
    };
    let mut detector = PlatoonDetector::new(config.clone(), first.x.len(), seed, mode)?;
    let mut events = Vec::new();
    for obs in observations {
        events.extend(detector.detect_step(obs)?.events);
    }
    Ok(events)
}

/// Detection settings for a replay: `seed` and `[detection]` of a TOML
/// document. Any other keys (a full scenario file) are ignored.
pub fn replay_config(text: &str) -> Result<(DetectionConfig, u64)> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
    let seed = match table.remove("seed") {
        None => 0,
        Some(toml::Value::Integer(s)) if s >= 0 => s as u64,
        Some(other) => return Err(Error::Config(format!("seed must be a non-negative integer, got {other}"))),
    };
    let detection = match table.remove("detection") {
        None => DetectionConfig::default(),
        Some(v) => v.try_into().map_err(|e: toml::de::Error| Error::Config(format!("detection: {}", e.message())))?,
    };
    detection.validate()?;
    Ok((detection, seed))
}

/// Bias-generator case file: the seven lists plus optional `n` (default 6)
/// and `max_iterations` (default 300).
pub fn parse_bias_case(text: &str) -> Result<(AttackCase, usize, usize)> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
    let mut take = |key: &str, default: usize| -> Result<usize> {
        match table.remove(key) {
            None => Ok(default),
            Some(toml::Value::Integer(v)) if v >= 1 => Ok(v as usize),
            Some(other) => Err(Error::Config(format!("{key} must be a positive integer, got {other}"))),
        }
    };
    let n = take("n", 6)?;
    let max_iterations = take("max_iterations", 300)?;
    let case = parse_attack_case(&toml::to_string(&table).expect("table serializes"), Some(n))?;
    Ok((case, n, max_iterations))
}

pub fn bias_file_name(channel: ChannelId) -> String {
    format!("{}_bias.csv", channel.as_str())
}

/// One channel matrix: header `iteration,fv1..fvn`, one row per iteration.
pub fn write_bias_matrix<W: Write>(bias: &BiasMatrices, channel: ChannelId, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["iteration".to_string()];
    header.extend((1..=bias.cols()).map(|i| format!("fv{i}")));
    w.write_record(&header)?;
    let m = bias.channel(channel);
    for t in 0..bias.rows() {
        let mut row = vec![t.to_string()];
        row.extend((0..bias.cols()).map(|c| m[(t, c)].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Bias matrices of control step `k`, written as four CSV files into `dir`.
pub fn generate_bias(case: &AttackCase, n: usize, k: usize, max_iterations: usize, dir: &Path) -> Result<BiasMatrices> {
    let bias = iter_attack_value_cal(n, k, max_iterations, case);
    std::fs::create_dir_all(dir)?;
    for channel in ChannelId::ALL {
        write_bias_matrix(&bias, channel, create(dir, &bias_file_name(channel))?)?;
    }
    Ok(bias)
}
