//! Deterministic simulation of a distributed MPC vehicle platoon under V2V
//! perception attacks, with a two-stage (gap comparator + online ELM) detector.
//!
//! A run proceeds control step by control step:
//! bias generation, iterative message exchange with injection, primal/dual
//! optimization, plant update, detection, and metric accumulation.

pub mod attack;
pub mod batch;
pub mod channel;
pub mod controller;
pub mod detection;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod metrics;
pub mod model;
pub mod runner;
pub mod scenario;

pub use attack::{AttackCase, BiasMatrices};
pub use channel::{ChannelId, IterationMessage};
pub use controller::ControlOutcome;
pub use detection::{AnomalyEvent, AnomalyKind};
pub use error::{Error, Result};
pub use model::{PlatoonState, SimConfig, VehicleState};
pub use scenario::Scenario;
