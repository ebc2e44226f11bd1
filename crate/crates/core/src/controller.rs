//! Distributed one-step MPC solved by a primal/dual double loop.
//!
//! Follower `i` chooses `u_i` to minimise
//!
//! ```text
//! ½·Qα·z_i² + Qβ·z'_i² + (τ²/2)·u_i²            (own pair)
//! + ½·Qα·z_{i+1}² + Qβ·z'_{i+1}²                  (pair with its follower)
//! + λ_i·(L + p·τ·v_i(k+1) − (x_{i−1}(k+1) − x_i(k+1)))
//! ```
//!
//! where the predecessor's predicted state arrives on the forward channels and
//! the follower's `z_{i+1}`, `z'_{i+1}` on the backward channels. Summed over
//! vehicles the stationary point of these local problems is the minimiser of
//! the platoon cost. Each iteration all followers take one damped Newton step
//! simultaneously (primal loop); once no iterate moves more than `primal_tol`
//! the safety gaps are checked and the multipliers updated (dual loop).

use crate::channel::{V2vChannel, VehicleIterate};
use crate::dynamics::step_vehicle;
use crate::error::{Error, Result};
use crate::model::{PlatoonState, SimConfig, SpacingState, VehicleState};

const MAX_HALVINGS: usize = 20;

/// Prediction model: identical to the plant.
pub fn predict(state: &VehicleState, u: f64, tau: f64) -> (f64, f64) {
    let next = step_vehicle(state, u, tau);
    (next.x, next.v)
}

/// `x_prev − x_self − (L + p·τ·v_self + δ)`.
pub fn spacing_error(x_pred_prev: f64, x_pred_self: f64, v_pred_self: f64, config: &SimConfig) -> f64 {
    x_pred_prev - x_pred_self - config.nominal_gap(v_pred_self)
}

pub fn relative_speed(v_pred_prev: f64, v_pred_self: f64) -> f64 {
    v_pred_prev - v_pred_self
}

pub fn spacing_state(front: (f64, f64), x_self: f64, v_self: f64, config: &SimConfig) -> SpacingState {
    SpacingState {
        z: spacing_error(front.0, x_self, v_self, config),
        z_prime: relative_speed(front.1, v_self),
    }
}

/// Platoon cost `Σ ½·Qα·z_i² + Qβ·z'_i² + (τ²/2)·u_i²`.
pub fn cost(z: &[f64], z_prime: &[f64], u: &[f64], config: &SimConfig) -> Result<f64> {
    if z.len() != config.n || z_prime.len() != config.n || u.len() != config.n {
        return Err(Error::Contract(format!(
            "cost expects {} entries per list, got {}/{}/{}",
            config.n,
            z.len(),
            z_prime.len(),
            u.len()
        )));
    }
    let tau2 = config.tau * config.tau;
    Ok(z.iter()
        .zip(z_prime)
        .zip(u)
        .map(|((z, zp), u)| 0.5 * config.q_alpha * z * z + config.q_beta * zp * zp + 0.5 * tau2 * u * u)
        .sum())
}

/// Iterates of one follower inside a control step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationState {
    pub u_ite: f64,
    pub v_ite: f64,
    pub x_ite: f64,
    /// Spacing error to the predecessor as seen by this vehicle.
    pub zx_ite: f64,
    /// Relative speed to the predecessor as seen by this vehicle.
    pub zv_ite: f64,
    pub iteration_index: usize,
}

impl IterationState {
    /// Iterate for acceleration `u` applied to the measured `state`, with the
    /// predecessor's predicted `(x, v)` as received.
    pub fn new(state: &VehicleState, u: f64, front: (f64, f64), iteration_index: usize, config: &SimConfig) -> Self {
        let (x_ite, v_ite) = predict(state, u, config.tau);
        let s = spacing_state(front, x_ite, v_ite, config);
        Self { u_ite: u, v_ite, x_ite, zx_ite: s.z, zv_ite: s.z_prime, iteration_index }
    }
}

/// Everything follower `i` knows when it updates its acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalProblem {
    /// Measured state at the start of the control step.
    pub state: VehicleState,
    /// Predecessor's `(x_ite, v_ite)` as received.
    pub front: (f64, f64),
    /// Follower's `(zx_ite, zv_ite)` as received; `None` for the last vehicle.
    pub rear: Option<(f64, f64)>,
    /// Acceleration that produced the iterates the follower reacted to.
    pub rear_anchor_u: f64,
    /// Safety multiplier.
    pub multiplier: f64,
}

/// Acceleration interval that honours both the acceleration and the velocity
/// limits for one step from `state`.
pub fn acceleration_box(state: &VehicleState, config: &SimConfig) -> (f64, f64) {
    let lo = config.a_min.max((config.v_min - state.v) / config.tau);
    let hi = config.a_max.min((config.v_max - state.v) / config.tau);
    if lo <= hi {
        (lo, hi)
    } else if state.v > config.v_max {
        (config.a_min, config.a_min)
    } else {
        (config.a_max, config.a_max)
    }
}

/// Safety constraint value `L + p·τ·v − gap`; positive means violated.
pub fn safety_violation(front_x: f64, x_self: f64, v_self: f64, config: &SimConfig) -> f64 {
    config.safety_gap(v_self) - (front_x - x_self)
}

/// Local Lagrangian of one follower as a function of its acceleration.
pub fn local_lagrangian(u: f64, problem: &LocalProblem, config: &SimConfig) -> f64 {
    let tau = config.tau;
    let (x, v) = predict(&problem.state, u, tau);
    let own = spacing_state(problem.front, x, v, config);
    let mut value = 0.5 * config.q_alpha * own.z * own.z
        + config.q_beta * own.z_prime * own.z_prime
        + 0.5 * tau * tau * u * u;
    if let Some((zx, zv)) = problem.rear {
        let du = u - problem.rear_anchor_u;
        let zf = zx + 0.5 * tau * tau * du;
        let zvf = zv + tau * du;
        value += 0.5 * config.q_alpha * zf * zf + config.q_beta * zvf * zvf;
    }
    value + problem.multiplier * safety_violation(problem.front.0, x, v, config)
}

/// Analytic first and second derivatives of [`local_lagrangian`] at `u`.
fn lagrangian_derivatives(u: f64, problem: &LocalProblem, config: &SimConfig) -> (f64, f64) {
    let tau = config.tau;
    let tau2 = tau * tau;
    // dz/du = -a, dz'/du = -tau, dg/du = +a
    let a = 0.5 * tau2 + config.spacing_constant * tau2;
    let (x, v) = predict(&problem.state, u, tau);
    let own = spacing_state(problem.front, x, v, config);
    let mut grad = -config.q_alpha * own.z * a - 2.0 * config.q_beta * own.z_prime * tau + tau2 * u;
    let mut hess = config.q_alpha * a * a + 2.0 * config.q_beta * tau2 + tau2;
    if let Some((zx, zv)) = problem.rear {
        let du = u - problem.rear_anchor_u;
        let zf = zx + 0.5 * tau2 * du;
        let zvf = zv + tau * du;
        grad += config.q_alpha * zf * 0.5 * tau2 + 2.0 * config.q_beta * zvf * tau;
        hess += config.q_alpha * 0.25 * tau2 * tau2 + 2.0 * config.q_beta * tau2;
    }
    grad += problem.multiplier * a;
    (grad, hess)
}

/// One damped Newton step on the local Lagrangian, clipped to the
/// acceleration box, with the iterates recomputed at the new acceleration.
pub fn primal_step(iter: &IterationState, problem: &LocalProblem, config: &SimConfig) -> Result<IterationState> {
    let u0 = iter.u_ite;
    let (grad, hess) = lagrangian_derivatives(u0, problem, config);
    if !grad.is_finite() || !hess.is_finite() || hess <= 0.0 {
        return Err(Error::numerical(format!(
            "Newton step undefined: gradient {grad}, hessian {hess}, u_ite {u0}, front {:?}, rear {:?}, multiplier {}",
            problem.front, problem.rear, problem.multiplier
        )));
    }
    let base = local_lagrangian(u0, problem, config);
    let mut step = -grad / hess;
    for _ in 0..MAX_HALVINGS {
        if local_lagrangian(u0 + step, problem, config) <= base {
            break;
        }
        step *= 0.5;
    }
    if local_lagrangian(u0 + step, problem, config) > base {
        step = 0.0;
    }
    let (lo, hi) = acceleration_box(&problem.state, config);
    let u = (u0 + step).clamp(lo, hi);
    Ok(IterationState::new(&problem.state, u, problem.front, iter.iteration_index + 1, config))
}

/// Primal stop rule: successive iterates within `tol`.
pub fn primal_converged(previous: f64, next: f64, tol: f64) -> bool {
    (next - previous).abs() <= tol
}

/// Non-negative multipliers of the safety constraints, one per follower.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub multipliers: Vec<f64>,
    pub dual_iteration: usize,
}

impl DualState {
    pub fn new(n: usize) -> Self {
        Self { multipliers: vec![0.0; n], dual_iteration: 0 }
    }
}

/// Predicted gap of one pair alongside the gap the safety constraint requires.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedGap {
    pub gap: f64,
    pub required: f64,
}

impl PredictedGap {
    pub fn violation(&self) -> f64 {
        self.required - self.gap
    }

    pub fn satisfied(&self) -> bool {
        self.gap >= self.required
    }
}

/// Projected ascent for violated pairs, geometric decay for slack ones.
pub fn dual_update(dual: &DualState, gaps: &[PredictedGap], config: &SimConfig) -> DualState {
    let multipliers = dual
        .multipliers
        .iter()
        .zip(gaps)
        .map(|(&m, g)| {
            if g.satisfied() {
                m * config.dual_decay
            } else {
                (m + config.dual_step * (g.violation() + 0.5 * config.safety_margin)).max(0.0)
            }
        })
        .collect();
    DualState { multipliers, dual_iteration: dual.dual_iteration + 1 }
}

/// Diagnostics of one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Largest |u_ite(t+1) − u_ite(t)| over followers.
    pub max_delta: f64,
    /// Primal loop exited in this iteration.
    pub primal_exit: bool,
    /// Result of the dual stop check, when it ran.
    pub gaps_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlOutcome {
    pub u_next: Vec<f64>,
    pub iterations_used: usize,
    /// Primal tolerance met and all predicted gaps safe before the cap.
    pub converged: bool,
    pub dual: DualState,
    pub log: Vec<IterationRecord>,
}

/// Solve one control step. Iterates start from the previously applied
/// accelerations; each iteration runs the forward exchange, the backward
/// exchange and the simultaneous primal update through `channel`.
pub fn run_control_step(
    platoon: &PlatoonState,
    leader_u: f64,
    channel: &mut V2vChannel,
    config: &SimConfig,
) -> Result<ControlOutcome> {
    let n = platoon.n();
    if channel.n() != n {
        return Err(Error::Contract(format!("channel sized for {} followers, platoon has {n}", channel.n())));
    }
    let (leader_x, leader_v) = predict(&platoon.leader, leader_u, config.tau);
    let mut u_ite: Vec<f64> = platoon
        .followers
        .iter()
        .map(|s| {
            let (lo, hi) = acceleration_box(s, config);
            s.u.clamp(lo, hi)
        })
        .collect();
    let mut dual = DualState::new(n);
    let mut log = Vec::new();
    let mut iterates = vec![VehicleIterate::default(); n + 1];

    for t in 0..config.max_iterations {
        iterates[0] = VehicleIterate { x_ite: leader_x, v_ite: leader_v, ..Default::default() };
        for (i, s) in platoon.followers.iter().enumerate() {
            let (x, v) = predict(s, u_ite[i], config.tau);
            iterates[i + 1].x_ite = x;
            iterates[i + 1].v_ite = v;
        }
        let fronts = channel.transmit_forward(&iterates, t);
        for i in 0..n {
            let it = &mut iterates[i + 1];
            let s = spacing_state(fronts[i], it.x_ite, it.v_ite, config);
            it.zx_ite = s.z;
            it.zv_ite = s.z_prime;
        }
        let rears = channel.transmit_backward(&iterates, t);

        let mut next = Vec::with_capacity(n);
        let mut max_delta = 0.0f64;
        for i in 0..n {
            let state = platoon.followers[i];
            let problem = LocalProblem {
                state,
                front: fronts[i],
                rear: rears[i],
                rear_anchor_u: u_ite[i],
                multiplier: dual.multipliers[i],
            };
            let current = IterationState::new(&state, u_ite[i], fronts[i], t, config);
            let updated = primal_step(&current, &problem, config)?;
            max_delta = max_delta.max((updated.u_ite - u_ite[i]).abs());
            next.push(updated);
        }
        u_ite = next.iter().map(|s| s.u_ite).collect();

        let primal_exit = max_delta <= config.primal_tol;
        let mut record = IterationRecord { iteration: t, max_delta, primal_exit, gaps_ok: None };
        if primal_exit {
            let gaps: Vec<PredictedGap> = next
                .iter()
                .zip(&fronts)
                .map(|(s, front)| PredictedGap {
                    gap: front.0 - s.x_ite,
                    required: config.safety_gap(s.v_ite) + 0.5 * config.safety_margin,
                })
                .collect();
            let ok = gaps.iter().all(PredictedGap::satisfied);
            record.gaps_ok = Some(ok);
            log.push(record);
            if ok {
                return Ok(ControlOutcome { u_next: u_ite, iterations_used: t + 1, converged: true, dual, log });
            }
            dual = dual_update(&dual, &gaps, config);
        } else {
            log.push(record);
        }
    }
    Ok(ControlOutcome { u_next: u_ite, iterations_used: config.max_iterations, converged: false, dual, log })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstraintViolation {
    Acceleration { vehicle: usize, u: f64 },
    Velocity { vehicle: usize, v: f64 },
    SafetyGap { vehicle: usize, gap: f64, required: f64 },
}

const CONSTRAINT_EPS: f64 = 1e-9;

/// Evaluate acceleration, velocity and safety-gap limits on the state that
/// `u` (followers) and `leader_u` produce from `platoon`.
pub fn check_constraints(u: &[f64], leader_u: f64, platoon: &PlatoonState, config: &SimConfig) -> Vec<ConstraintViolation> {
    let mut out = Vec::new();
    let mut prev = step_vehicle(&platoon.leader, leader_u, config.tau);
    for (i, (state, &ui)) in platoon.followers.iter().zip(u).enumerate() {
        let vehicle = i + 1;
        if ui < config.a_min - CONSTRAINT_EPS || ui > config.a_max + CONSTRAINT_EPS {
            out.push(ConstraintViolation::Acceleration { vehicle, u: ui });
        }
        let next = step_vehicle(state, ui, config.tau);
        if next.v < config.v_min - CONSTRAINT_EPS || next.v > config.v_max + CONSTRAINT_EPS {
            out.push(ConstraintViolation::Velocity { vehicle, v: next.v });
        }
        let gap = prev.x - next.x;
        let required = config.safety_gap(next.v);
        if gap < required - CONSTRAINT_EPS {
            out.push(ConstraintViolation::SafetyGap { vehicle, gap, required });
        }
        prev = next;
    }
    out
}
