//! Independent scenarios run side by side.

use crate::error::Result;
use crate::exec::{self, ExecMode};
use crate::runner::{run_scenario, RunResult};
use crate::scenario::Scenario;

/// Run every scenario; `mode` decides whether scenarios fan out over the
/// thread pool. Each simulation itself runs sequentially, and results come
/// back in input order.
pub fn run_batch(scenarios: &[Scenario], mode: ExecMode) -> Vec<Result<RunResult>> {
    exec::map(mode, scenarios, |s| run_scenario(s, ExecMode::Sequential))
}
