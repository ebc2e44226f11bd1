//! `platoon` — run platoon scenarios, emit attack bias matrices, and replay
//! detection over recorded traces.
//!
//! Exit codes: 0 success, 1 configuration / input error, 2 numerical failure.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use platoon_core::detection::write_anomalies;
use platoon_core::exec::ExecMode;
use platoon_core::runner::{
    generate_bias, parse_bias_case, read_trace_observations, replay_config, replay_detect, run_to_dir, ANOMALY_FILE,
};
use platoon_core::{Error, Scenario};

#[derive(Debug, Parser)]
#[command(name = "platoon", version, about = "MPC platoon simulator with V2V bias injection and attack detection")]
struct Cli {
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a scenario and write trace, anomaly and impact files.
    Run {
        #[arg(long, value_name = "FILE")]
        scenario: PathBuf,
        /// Output directory; defaults to the scenario's `output.dir`.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the number of control steps.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Write the four bias matrices of one control step as CSV.
    GenerateBias {
        #[arg(long, value_name = "FILE")]
        case: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Re-run detection over a recorded trace.
    ReplayDetect {
        #[arg(long, value_name = "FILE")]
        trace: PathBuf,
        /// TOML with `seed` and a `[detection]` table (a scenario file works).
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        Error::AttackCase { path: p, message } => Error::AttackCase { path: format!("{}: {p}", path.display()), message },
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    let mode = if cli.sequential { ExecMode::Sequential } else { ExecMode::Parallel };
    match cli.command {
        Command::Run { scenario, out, seed, steps } => {
            let mut s = Scenario::from_path(&scenario)?;
            if let Some(seed) = seed {
                s.seed = seed;
            }
            if let Some(steps) = steps {
                s.sim.total_control_steps = steps;
                s.validate().map_err(|e| with_path(&scenario, e))?;
            }
            let dir = out
                .or_else(|| s.output.dir.clone())
                .ok_or_else(|| Error::Config("no output directory: pass --out or set output.dir".into()))?;
            let result = run_to_dir(&s, &dir, mode)?;
            println!(
                "{} control steps, {} anomaly events, {} flagged steps; artifacts in {}",
                result.steps.len(),
                result.events.len(),
                result.flagged_steps().len(),
                dir.display()
            );
            for v in &result.report.vehicles {
                println!("fv{}: {:?}", v.vehicle, v.classification);
            }
        }
        Command::GenerateBias { case, k, out } => {
            let (attack, n, max_iterations) = parse_bias_case(&read(&case)?).map_err(|e| with_path(&case, e))?;
            generate_bias(&attack, n, k, max_iterations, &out)?;
            println!("bias matrices for control step {k} ({max_iterations} x {n}) in {}", out.display());
        }
        Command::ReplayDetect { trace, config, out } => {
            let (detection, seed) = replay_config(&read(&config)?).map_err(|e| with_path(&config, e))?;
            let file = File::open(&trace).map_err(|e| Error::Config(format!("cannot read {}: {e}", trace.display())))?;
            let observations = read_trace_observations(file).map_err(|e| with_path(&trace, e))?;
            let events = replay_detect(&observations, &detection, seed, mode)?;
            std::fs::create_dir_all(&out)?;
            write_anomalies(&events, BufWriter::new(File::create(out.join(ANOMALY_FILE))?))?;
            println!("{} snapshots replayed, {} anomaly events", observations.len(), events.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
