//! Exact discrete-time longitudinal plant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PlatoonState, VehicleState};

/// Advance one vehicle by one control step under constant acceleration `u`.
pub fn step_vehicle(state: &VehicleState, u: f64, tau: f64) -> VehicleState {
    VehicleState {
        x: state.x + state.v * tau + u * tau * tau / 2.0,
        v: state.v + u * tau,
        u,
    }
}

/// Step every vehicle; controller outputs are applied unclipped.
pub fn step_platoon(
    platoon: &PlatoonState,
    leader_u: f64,
    follower_u: &[f64],
    tau: f64,
) -> Result<PlatoonState> {
    if follower_u.len() != platoon.n() {
        return Err(Error::Contract(format!(
            "expected {} follower accelerations, got {}",
            platoon.n(),
            follower_u.len()
        )));
    }
    Ok(PlatoonState {
        leader: step_vehicle(&platoon.leader, leader_u, tau),
        followers: platoon
            .followers
            .iter()
            .zip(follower_u)
            .map(|(s, &u)| step_vehicle(s, u, tau))
            .collect(),
        control_step: platoon.control_step + 1,
    })
}

/// Piecewise-constant leader acceleration: each segment `(start_step, accel)`
/// holds until the next one starts. Before the first segment the leader cruises.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LeaderProfile {
    segments: Vec<(usize, f64)>,
}

impl LeaderProfile {
    pub fn constant_speed() -> Self {
        Self::default()
    }

    pub fn new(mut segments: Vec<(usize, f64)>) -> Self {
        segments.sort_by_key(|s| s.0);
        Self { segments }
    }

    pub fn segments(&self) -> &[(usize, f64)] {
        &self.segments
    }

    pub fn acceleration_at(&self, k: usize) -> f64 {
        self.segments
            .iter()
            .take_while(|(start, _)| *start <= k)
            .last()
            .map_or(0.0, |s| s.1)
    }
}
