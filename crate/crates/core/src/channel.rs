//! Iterative V2V exchange and the bias injection point.
//!
//! Per iteration every vehicle (leader included) sends its predicted position
//! and velocity forward to its follower, then every follower except fv1 sends
//! its spacing error and relative speed backward to its predecessor. The
//! leader never receives, and leader-sent messages are never biased.

use serde::{Deserialize, Serialize};

use crate::attack::BiasMatrices;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChannelId {
    #[serde(rename = "x_ite")]
    XIte,
    #[serde(rename = "v_ite")]
    VIte,
    #[serde(rename = "zx_ite")]
    ZxIte,
    #[serde(rename = "zv_ite")]
    ZvIte,
}

impl ChannelId {
    pub const ALL: [ChannelId; 4] = [ChannelId::XIte, ChannelId::VIte, ChannelId::ZxIte, ChannelId::ZvIte];

    pub fn as_str(&self) -> &'static str {
        match self {
            ChannelId::XIte => "x_ite",
            ChannelId::VIte => "v_ite",
            ChannelId::ZxIte => "zx_ite",
            ChannelId::ZvIte => "zv_ite",
        }
    }

    pub fn direction(&self) -> Direction {
        match self {
            ChannelId::XIte | ChannelId::VIte => Direction::Forward,
            ChannelId::ZxIte | ChannelId::ZvIte => Direction::Backward,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Predecessor to follower.
    Forward,
    /// Follower to predecessor.
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Payload {
    Forward { x_ite: f64, v_ite: f64 },
    Backward { zx_ite: f64, zv_ite: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationMessage {
    pub sender: usize,
    pub receiver: usize,
    pub iteration_index: usize,
    pub payload: Payload,
}

impl IterationMessage {
    pub fn direction(&self) -> Direction {
        match self.payload {
            Payload::Forward { .. } => Direction::Forward,
            Payload::Backward { .. } => Direction::Backward,
        }
    }

    /// Value carried on `channel`, if this message carries it.
    pub fn value(&self, channel: ChannelId) -> Option<f64> {
        match (self.payload, channel) {
            (Payload::Forward { x_ite, .. }, ChannelId::XIte) => Some(x_ite),
            (Payload::Forward { v_ite, .. }, ChannelId::VIte) => Some(v_ite),
            (Payload::Backward { zx_ite, .. }, ChannelId::ZxIte) => Some(zx_ite),
            (Payload::Backward { zv_ite, .. }, ChannelId::ZvIte) => Some(zv_ite),
            _ => None,
        }
    }
}

/// Current iterates of one vehicle. For the leader only `x_ite`/`v_ite` are used.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VehicleIterate {
    pub x_ite: f64,
    pub v_ite: f64,
    pub zx_ite: f64,
    pub zv_ite: f64,
}

/// Forward messages leader→fv1 … fv(n-1)→fvn. `iterates[0]` is the leader.
pub fn forward_messages(iterates: &[VehicleIterate], iteration_index: usize) -> Vec<IterationMessage> {
    let n = iterates.len().saturating_sub(1);
    (0..n)
        .map(|j| IterationMessage {
            sender: j,
            receiver: j + 1,
            iteration_index,
            payload: Payload::Forward { x_ite: iterates[j].x_ite, v_ite: iterates[j].v_ite },
        })
        .collect()
}

/// Backward messages fv2→fv1 … fvn→fv(n-1).
pub fn backward_messages(iterates: &[VehicleIterate], iteration_index: usize) -> Vec<IterationMessage> {
    let n = iterates.len().saturating_sub(1);
    (2..=n)
        .map(|i| IterationMessage {
            sender: i,
            receiver: i - 1,
            iteration_index,
            payload: Payload::Backward { zx_ite: iterates[i].zx_ite, zv_ite: iterates[i].zv_ite },
        })
        .collect()
}

/// All messages of one iteration in delivery order: every forward broadcast,
/// then every backward send.
pub fn exchange(iterates: &[VehicleIterate], iteration_index: usize) -> Vec<IterationMessage> {
    let mut msgs = forward_messages(iterates, iteration_index);
    msgs.extend(backward_messages(iterates, iteration_index));
    msgs
}

/// Add the sender's bias column at this iteration to every carried channel.
pub fn apply_bias(msg: &IterationMessage, bias: &BiasMatrices) -> IterationMessage {
    if msg.sender == 0 {
        return *msg;
    }
    let b = |c| bias.get(c, msg.iteration_index, msg.sender);
    let payload = match msg.payload {
        Payload::Forward { x_ite, v_ite } => Payload::Forward {
            x_ite: x_ite + b(ChannelId::XIte),
            v_ite: v_ite + b(ChannelId::VIte),
        },
        Payload::Backward { zx_ite, zv_ite } => Payload::Backward {
            zx_ite: zx_ite + b(ChannelId::ZxIte),
            zv_ite: zv_ite + b(ChannelId::ZvIte),
        },
    };
    IterationMessage { payload, ..*msg }
}

/// Suppress every message `sender` emits in `direction` during control steps
/// `[start_step, end_step]`. The receiver keeps using the last value it got.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MessageDrop {
    pub sender: usize,
    pub direction: Direction,
    pub start_step: usize,
    pub end_step: usize,
}

impl MessageDrop {
    fn matches(&self, msg: &IterationMessage, control_step: usize) -> bool {
        self.sender == msg.sender
            && self.direction == msg.direction()
            && self.start_step <= control_step
            && control_step <= self.end_step
    }
}

/// The V2V medium for one platoon. Holds the bias for the current control
/// step, optional drops, and the last value delivered on every link.
#[derive(Debug, Clone)]
pub struct V2vChannel {
    n: usize,
    bias: BiasMatrices,
    drops: Vec<MessageDrop>,
    control_step: usize,
    last_forward: Vec<Option<(f64, f64)>>,
    last_backward: Vec<Option<(f64, f64)>>,
    log: Option<Vec<IterationMessage>>,
}

impl V2vChannel {
    pub fn new(n: usize, max_iterations: usize) -> Self {
        Self {
            n,
            bias: BiasMatrices::zeros(max_iterations, n),
            drops: Vec::new(),
            control_step: 0,
            last_forward: vec![None; n + 1],
            last_backward: vec![None; n + 1],
            log: None,
        }
    }

    pub fn with_drops(mut self, drops: Vec<MessageDrop>) -> Self {
        self.drops = drops;
        self
    }

    /// Keep a copy of every delivered message.
    pub fn with_log(mut self) -> Self {
        self.log = Some(Vec::new());
        self
    }

    pub fn take_log(&mut self) -> Vec<IterationMessage> {
        self.log.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bias(&self) -> &BiasMatrices {
        &self.bias
    }

    pub fn set_step(&mut self, control_step: usize, bias: BiasMatrices) {
        self.control_step = control_step;
        self.bias = bias;
    }

    fn deliver(&mut self, msg: IterationMessage) {
        let dropped = self.drops.iter().any(|d| d.matches(&msg, self.control_step));
        let slot = match msg.direction() {
            Direction::Forward => &mut self.last_forward[msg.receiver],
            Direction::Backward => &mut self.last_backward[msg.receiver],
        };
        // A drop before anything was ever delivered on this link has no effect.
        if dropped && slot.is_some() {
            return;
        }
        let delivered = apply_bias(&msg, &self.bias);
        *slot = Some(match delivered.payload {
            Payload::Forward { x_ite, v_ite } => (x_ite, v_ite),
            Payload::Backward { zx_ite, zv_ite } => (zx_ite, zv_ite),
        });
        if let Some(log) = self.log.as_mut() {
            log.push(delivered);
        }
    }

    /// Forward phase of an iteration. Returns the `(x_ite, v_ite)` each
    /// follower now holds for its predecessor, indexed `0..n` for fv1..fvn.
    pub fn transmit_forward(&mut self, iterates: &[VehicleIterate], iteration_index: usize) -> Vec<(f64, f64)> {
        for msg in forward_messages(iterates, iteration_index) {
            self.deliver(msg);
        }
        (1..=self.n)
            .map(|i| self.last_forward[i].expect("forward link delivered"))
            .collect()
    }

    /// Backward phase. Returns the `(zx_ite, zv_ite)` each follower holds for
    /// its own follower; `None` for the last vehicle.
    pub fn transmit_backward(
        &mut self,
        iterates: &[VehicleIterate],
        iteration_index: usize,
    ) -> Vec<Option<(f64, f64)>> {
        for msg in backward_messages(iterates, iteration_index) {
            self.deliver(msg);
        }
        (1..=self.n)
            .map(|i| if i < self.n { self.last_backward[i] } else { None })
            .collect()
    }
}
