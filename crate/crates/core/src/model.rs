//! Shared configuration and state types.
//!
//! Vehicles are indexed 0 (leader) through `n` (last follower); follower `i`
//! is `fv{i}`. Gaps are front-bumper to front-bumper, `x[i-1] - x[i]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState {
    /// Position (m).
    pub x: f64,
    /// Velocity (m/s).
    pub v: f64,
    /// Last applied acceleration (m/s²).
    pub u: f64,
}

impl VehicleState {
    pub fn new(x: f64, v: f64, u: f64) -> Self {
        Self { x, v, u }
    }
}

/// Platoon and controller parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Number of followers.
    pub n: usize,
    /// Sample length (s).
    pub tau: f64,
    /// Vehicle length (m).
    pub vehicle_length: f64,
    /// Adaptive spacing constant.
    pub spacing_constant: f64,
    /// Infeasibility-avoidance slack added to the target spacing (m).
    pub delta: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub q_alpha: f64,
    pub q_beta: f64,
    /// Combined primal + dual iteration cap per control step.
    pub max_iterations: usize,
    /// Primal stop threshold on successive iterates (m/s²).
    pub primal_tol: f64,
    pub total_control_steps: usize,
    /// Projected ascent step for the safety multipliers.
    pub dual_step: f64,
    /// Multiplier decay factor applied while a safety constraint is slack.
    pub dual_decay: f64,
    /// Back-off (m) from the safety gap: the dual loop accepts a predicted gap
    /// only with half of it to spare and drives multipliers towards all of it,
    /// so the check passes after finitely many rounds and survives the last
    /// primal move of the predecessor.
    pub safety_margin: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        let tau = 0.4;
        Self {
            n: 6,
            tau,
            vehicle_length: 5.0,
            // 14.5 m of speed-dependent spacing at 30 m/s: with delta this is a
            // 0.5 s bumper-to-bumper headway at the reference speed.
            spacing_constant: 14.5 / (tau * 30.0),
            delta: 0.5,
            a_min: -5.0,
            a_max: 5.0,
            v_min: 0.0,
            v_max: 40.0,
            q_alpha: 1.0,
            q_beta: 1.0,
            max_iterations: 300,
            primal_tol: 0.01,
            total_control_steps: 100,
            dual_step: 0.5,
            dual_decay: 0.9,
            safety_margin: 0.1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        let finite = [
            self.tau,
            self.vehicle_length,
            self.spacing_constant,
            self.delta,
            self.a_min,
            self.a_max,
            self.v_min,
            self.v_max,
            self.q_alpha,
            self.q_beta,
            self.primal_tol,
            self.dual_step,
            self.dual_decay,
            self.safety_margin,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("all parameters must be finite");
        }
        if self.n < 1 {
            return bad("n must be at least 1");
        }
        if self.tau <= 0.0 {
            return bad("tau must be positive");
        }
        if self.vehicle_length <= 0.0 {
            return bad("vehicle_length must be positive");
        }
        if self.max_iterations < 1 {
            return bad("max_iterations must be at least 1");
        }
        if self.primal_tol <= 0.0 {
            return bad("primal_tol must be positive");
        }
        if self.a_min >= self.a_max {
            return bad("a_min must be below a_max");
        }
        if self.v_min >= self.v_max {
            return bad("v_min must be below v_max");
        }
        if self.q_alpha <= 0.0 || self.q_beta <= 0.0 {
            return bad("q_alpha and q_beta must be positive");
        }
        if self.safety_margin < 0.0 {
            return bad("safety_margin must be non-negative");
        }
        if self.dual_step <= 0.0 || !(0.0..=1.0).contains(&self.dual_decay) {
            return bad("dual_step must be positive and dual_decay in [0, 1]");
        }
        Ok(())
    }

    /// Minimum front-to-front gap allowed at speed `v`: `L + p·tau·v`.
    pub fn safety_gap(&self, v: f64) -> f64 {
        self.vehicle_length + self.spacing_constant * self.tau * v
    }

    /// Target front-to-front gap at speed `v`: `L + p·tau·v + delta`.
    pub fn nominal_gap(&self, v: f64) -> f64 {
        self.safety_gap(v) + self.delta
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatoonState {
    pub leader: VehicleState,
    /// Front to rear: `followers[0]` is fv1.
    pub followers: Vec<VehicleState>,
    pub control_step: usize,
}

impl PlatoonState {
    pub fn n(&self) -> usize {
        self.followers.len()
    }

    /// Vehicle by platoon index (0 = leader).
    pub fn vehicle(&self, idx: usize) -> &VehicleState {
        if idx == 0 {
            &self.leader
        } else {
            &self.followers[idx - 1]
        }
    }

    /// Front gap of follower `i` (1-based): `x[i-1] - x[i]`.
    pub fn gap_front(&self, i: usize) -> f64 {
        self.vehicle(i - 1).x - self.vehicle(i).x
    }

    pub fn vehicles(&self) -> impl Iterator<Item = &VehicleState> {
        std::iter::once(&self.leader).chain(self.followers.iter())
    }
}

/// Spacing error and relative speed of one adjacent pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpacingState {
    pub z: f64,
    pub z_prime: f64,
}

/// Platoon at equilibrium: every vehicle at `leader_speed`, zero acceleration,
/// nominal gaps. The last follower sits at x = 0.
pub fn initial_platoon(config: &SimConfig, leader_speed: f64) -> Result<PlatoonState> {
    config.validate()?;
    if !(config.v_min..=config.v_max).contains(&leader_speed) {
        return Err(Error::Config(format!(
            "leader speed {leader_speed} outside [{}, {}]",
            config.v_min, config.v_max
        )));
    }
    let gap = config.nominal_gap(leader_speed);
    let n = config.n;
    let at = |idx: usize| VehicleState::new((n - idx) as f64 * gap, leader_speed, 0.0);
    Ok(PlatoonState {
        leader: at(0),
        followers: (1..=n).map(at).collect(),
        control_step: 0,
    })
}
