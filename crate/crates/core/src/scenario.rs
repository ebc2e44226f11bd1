//! Scenario configuration: one TOML document describing the platoon, the
//! leader's motion, the attack case (the seven lists verbatim), the detector,
//! the metrics and which artifacts to write.
//!
//! ```toml
//! seed = 7
//!
//! [sim]
//! total_control_steps = 100
//!
//! [leader]
//! initial_speed = 30.0
//! segments = [[60, -1.0], [70, 0.0]]
//!
//! [attack]
//! iter_victim_list = [4]
//! control_attackperiod_list = [[[40, 45]]]
//! iter_malichannel_list = [[['x_ite']]]
//! iter_freq_type_list = [[['Continuous']]]
//! iter_freqparavalue_list = [[[[0]]]]
//! iter_biastype_list = [[['Constant']]]
//! iter_biasparavalue_list = [[[[10]]]]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attack::{AttackCase, AttackCaseLists};
use crate::channel::MessageDrop;
use crate::detection::DetectionConfig;
use crate::dynamics::{step_vehicle, LeaderProfile};
use crate::error::{Error, Result};
use crate::metrics::MetricsConfig;
use crate::model::SimConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeaderConfig {
    /// Cruise speed of the whole platoon at step 0 (m/s).
    pub initial_speed: f64,
    /// `(start_step, acceleration)` pairs; each holds until the next starts.
    pub segments: LeaderProfile,
}

impl Default for LeaderConfig {
    fn default() -> Self {
        Self { initial_speed: 30.0, segments: LeaderProfile::constant_speed() }
    }
}

/// Which artifacts a run writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Default output directory when none is given on the command line.
    pub dir: Option<PathBuf>,
    pub trace: bool,
    pub anomalies: bool,
    pub report: bool,
    pub impact_csv: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, trace: true, anomalies: true, report: true, impact_csv: true }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    /// Single source of randomness (ELM weights).
    pub seed: u64,
    pub sim: SimConfig,
    pub leader: LeaderConfig,
    pub attack: AttackCaseLists,
    pub detection: DetectionConfig,
    pub metrics: MetricsConfig,
    pub output: OutputConfig,
    pub drops: Vec<MessageDrop>,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            Error::AttackCase { path: p, message } => {
                Error::AttackCase { path: format!("{}: {p}", path.display()), message }
            }
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario is always serializable")
    }

    /// Validated attack case sized for this platoon.
    pub fn attack_case(&self) -> Result<AttackCase> {
        AttackCase::from_lists(&self.attack, Some(self.sim.n))
    }

    pub fn with_attack(mut self, case: &AttackCase) -> Self {
        self.attack = case.to_lists();
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        self.detection.validate()?;
        let m = &self.metrics;
        if !(m.safe_lo < m.safe_hi) || !(m.accel_lo < m.accel_hi) {
            return Err(Error::Config("metrics: need safe_lo < safe_hi and accel_lo < accel_hi".into()));
        }
        self.attack_case()?;
        for d in &self.drops {
            if d.sender > self.sim.n || d.start_step > d.end_step {
                return Err(Error::Config(format!("drop {d:?}: sender beyond the platoon or empty interval")));
            }
        }
        self.check_leader_speed()
    }

    /// The leader profile must keep the leader inside the velocity bounds.
    fn check_leader_speed(&self) -> Result<()> {
        let c = &self.sim;
        if !(c.v_min..=c.v_max).contains(&self.leader.initial_speed) {
            return Err(Error::Config(format!(
                "leader initial_speed {} outside [{}, {}]",
                self.leader.initial_speed, c.v_min, c.v_max
            )));
        }
        let mut leader = crate::model::VehicleState::new(0.0, self.leader.initial_speed, 0.0);
        for k in 0..c.total_control_steps {
            leader = step_vehicle(&leader, self.leader.segments.acceleration_at(k), c.tau);
            if leader.v < c.v_min - 1e-9 || leader.v > c.v_max + 1e-9 {
                return Err(Error::Config(format!(
                    "leader profile drives the leader to {} m/s at control step {}",
                    leader.v,
                    k + 1
                )));
            }
        }
        Ok(())
    }
}
