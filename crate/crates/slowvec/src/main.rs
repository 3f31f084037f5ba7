//! Command-line front end: scenario runs, the randomized consistency
//! suite, operator export, and version info.
//!
//! Exit codes triage three ways: 0 when every asserted check passed, 2 when
//! a scan or cap ran out before settling one (inconclusive), 1 on errors or
//! outright failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use slowvec_core::operators::{
    make_cyclic_shift, make_split_operator, make_stochastic, make_swap, make_truncated_shift,
    ShiftDirection,
};
use slowvec_core::C64;

use slowvec::json::OperatorJson;
use slowvec::runner::{run_scenario, Overrides};
use slowvec::scenario::Scenario;
use slowvec::suite::{run_suite, SuiteConfig};

#[derive(Parser)]
#[command(
    name = "slowvec",
    version,
    about = "Long-run analysis of power-bounded linear operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file and write its report and CSV details.
    Run {
        /// Scenario JSON file.
        file: PathBuf,
        /// Override the scenario's orbit horizon.
        #[arg(long)]
        horizon: Option<usize>,
        /// Directory receiving report.json and the CSV files (default:
        /// current directory).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Generate seeded operators with known ground truth and run every
    /// module's invariant battery against them.
    Suite {
        /// Master seed; the whole suite is a pure function of it.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of generated instances (at least 1).
        #[arg(long, default_value_t = 8)]
        count: usize,
        /// Worker threads (default: one per core).
        #[arg(long)]
        workers: Option<usize>,
        /// Directory receiving suite_report.json and any repro scenarios.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Build one operator from a named family and print its JSON shape.
    ExportOperator {
        #[arg(long, value_enum)]
        family: Family,
        /// Dimension, for the families that take one.
        #[arg(long)]
        dim: Option<usize>,
        /// Seed, for the seeded families.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Shift direction for the truncated shift.
        #[arg(long, value_enum, default_value_t = Direction::Right)]
        direction: Direction,
        /// Balance the stochastic family to doubly stochastic.
        #[arg(long)]
        doubly: bool,
        /// Unit-modulus eigenvalue count for the split family (placed at
        /// the roots of unity).
        #[arg(long, default_value_t = 1)]
        peripheral_count: usize,
        /// Decaying-block dimension for the split family.
        #[arg(long, default_value_t = 2)]
        interior_dim: usize,
        /// Spectral radius of the decaying block for the split family.
        #[arg(long, default_value_t = 0.4)]
        contraction_radius: f64,
        /// Condition number of the similarity for the split family.
        #[arg(long, default_value_t = 2.0)]
        conditioning: f64,
        /// Write the shape to this file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the version line.
    Version,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    CyclicShift,
    TruncatedShift,
    Swap,
    Stochastic,
    Split,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Left,
    Right,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::Run { file, horizon, out_dir } => {
            let text = std::fs::read_to_string(&file)
                .map_err(|e| anyhow::anyhow!("reading {}: {e}", file.display()))?;
            let scenario = Scenario::from_json(&text)
                .map_err(|e| anyhow::anyhow!("parsing {}: {e}", file.display()))?;
            let outcome = run_scenario(&scenario, &Overrides { horizon, out_dir })?;
            println!("{}", serde_json::to_string_pretty(&outcome.report)?);
            for note in outcome.report["notes"].as_array().into_iter().flatten() {
                eprintln!(
                    "note [{}] {}: {}",
                    note["severity"].as_str().unwrap_or("?"),
                    note["stage"].as_str().unwrap_or("?"),
                    note["message"].as_str().unwrap_or("?"),
                );
            }
            Ok(outcome.status.code() as u8)
        }
        Command::Suite { seed, count, workers, out_dir } => {
            let outcome = run_suite(&SuiteConfig { seed, count, workers, out_dir })?;
            println!("{}", serde_json::to_string_pretty(&outcome.report)?);
            if outcome.failures > 0 {
                eprintln!(
                    "{} of {} instances failed; reproduction scenarios written alongside the report",
                    outcome.failures, count
                );
            }
            Ok(outcome.status.code() as u8)
        }
        Command::ExportOperator {
            family,
            dim,
            seed,
            direction,
            doubly,
            peripheral_count,
            interior_dim,
            contraction_radius,
            conditioning,
            out,
        } => {
            let op = match family {
                Family::CyclicShift => {
                    let dim = dim.ok_or_else(|| anyhow::anyhow!("cyclic-shift needs --dim"))?;
                    make_cyclic_shift(dim).map_err(|e| anyhow::anyhow!("{e}"))?
                }
                Family::TruncatedShift => {
                    let dim = dim.ok_or_else(|| anyhow::anyhow!("truncated-shift needs --dim"))?;
                    let direction = match direction {
                        Direction::Left => ShiftDirection::Left,
                        Direction::Right => ShiftDirection::Right,
                    };
                    make_truncated_shift(dim, direction).map_err(|e| anyhow::anyhow!("{e}"))?
                }
                Family::Swap => make_swap(),
                Family::Stochastic => {
                    let dim = dim.ok_or_else(|| anyhow::anyhow!("stochastic needs --dim"))?;
                    make_stochastic(dim, seed, doubly).map_err(|e| anyhow::anyhow!("{e}"))?
                }
                Family::Split => {
                    let p = peripheral_count;
                    let peripheral: Vec<C64> = (0..p)
                        .map(|k| {
                            let theta = 2.0 * core::f64::consts::PI * k as f64 / p.max(1) as f64;
                            C64::new(theta.cos(), theta.sin())
                        })
                        .collect();
                    make_split_operator(
                        &peripheral,
                        interior_dim,
                        contraction_radius,
                        conditioning,
                        seed,
                    )
                    .map_err(|e| anyhow::anyhow!("{e}"))?
                    .operator
                }
            };
            let shape = OperatorJson::from_operator(&op);
            let text = format!("{}\n", serde_json::to_string_pretty(&shape)?);
            match out {
                Some(path) => std::fs::write(&path, text)
                    .map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Version => {
            println!("slowvec {}", env!("CARGO_PKG_VERSION"));
            Ok(0)
        }
    }
}
