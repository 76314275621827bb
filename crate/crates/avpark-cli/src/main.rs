//! Command line front end for the parking toolkit.
//!
//! Exit codes: 0 success, 2 the instance or schedule is infeasible, 3 the
//! exact search ran out of budget, 4 bad flags or malformed input files,
//! 1 anything else.

mod commands;
mod experiment;

use std::path::PathBuf;
use std::process::ExitCode;

use avpark_core::Error;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "avpark",
    version,
    about = "Assign autonomous vehicles to V2G parking facilities"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw a random instance and write it to a file
    Generate(GenerateArgs),
    /// Solve an instance and write the resulting assignment
    Solve(SolveArgs),
    /// Run a benchmark sweep, writing CSV and plot data
    Experiment(ExperimentArgs),
    /// Write the integer program for an instance in LP format
    ExportLp(ExportLpArgs),
    /// Check an assignment file against its instance
    Check(CheckArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Where to write the instance
    #[arg(short, long)]
    out: PathBuf,
    /// RNG seed; mandatory so every file is reproducible
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 20)]
    avs: usize,
    #[arg(long, default_value_t = 3)]
    facilities: usize,
    #[arg(long, default_value_t = 24)]
    slots: u32,
    #[arg(long)]
    horizon_minutes: Option<f64>,
    /// Side of the square everything is placed in, km
    #[arg(long)]
    area_km: Option<f64>,
    #[arg(long)]
    speed_kmh: Option<f64>,
    /// Lower end of the detour budget draw, km
    #[arg(long)]
    dmax_min: Option<f64>,
    /// Upper end of the detour budget draw, km
    #[arg(long)]
    dmax_max: Option<f64>,
    /// Facility capacity: "half" (of the fleet) or a fixed count
    #[arg(long)]
    capacity: Option<String>,
    /// Generator config file; when given it overrides all the flags above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Method {
    Exact,
    Distributed,
    Greedy,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file to solve
    instance: PathBuf,
    #[arg(long, value_enum)]
    method: Method,
    /// Where to write the assignment; defaults to the instance path with
    /// the extension replaced by "assignment"
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Channel seed; mandatory for the distributed method
    #[arg(long)]
    seed: Option<u64>,
    /// Packet drop probability on every link
    #[arg(long, default_value_t = 0.0)]
    drop_prob: f64,
    #[arg(long, default_value_t = 500)]
    max_iters: u32,
    /// Relative-change convergence threshold
    #[arg(long, default_value_t = 1e-5)]
    delta: f64,
    /// Initial step size for the price updates
    #[arg(long, default_value_t = 0.01)]
    gamma0: f64,
    /// Step-size cap decay rate
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_value_t = 200)]
    per_round_delay_ms: u64,
    /// Write a per-iteration CSV trace of the distributed run here
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Search budget for the exact method, in visited nodes
    #[arg(long, default_value_t = 2_000_000)]
    max_nodes: u64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum TestId {
    /// Sweep the packet drop probability
    CommLoss,
    /// Sweep the number of slots the same horizon is divided into
    TimeScaling,
    /// Sweep the fleet size
    ScaleAvs,
    /// Sweep the facility count
    ScaleFacilities,
    /// Trace one distributed run iteration by iteration
    Convergence,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_enum)]
    test: TestId,
    /// Directory the CSV and plot files are written into
    #[arg(long)]
    out_dir: PathBuf,
    /// Base seed; point j of a sweep uses seed + j
    #[arg(long)]
    seed: Option<u64>,
    /// Seeds per sweep point
    #[arg(long, default_value_t = 5)]
    seeds: u32,
    #[arg(long, default_value_t = 8)]
    avs: usize,
    #[arg(long, default_value_t = 2)]
    facilities: usize,
    /// Slot count for tests that do not sweep it; time-scaling always
    /// generates at the largest sweep scale
    #[arg(long, default_value_t = 24)]
    slots: u32,
    /// Which solvers produce rows; defaults depend on the test
    #[arg(long, value_enum, value_delimiter = ',')]
    solvers: Option<Vec<Method>>,
    /// Drop probability for the convergence trace
    #[arg(long, default_value_t = 0.0)]
    drop_prob: f64,
    #[arg(long, default_value_t = 500)]
    max_iters: u32,
    /// Search budget per exact solve, in visited nodes
    #[arg(long, default_value_t = 2_000_000)]
    max_nodes: u64,
    /// Generator config file; overrides the instance-shape flags
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ExportLpArgs {
    instance: PathBuf,
    /// Output path; stdout when omitted
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    instance: PathBuf,
    assignment: PathBuf,
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::AvInfeasible { .. } | Error::RecoveryFailed { .. } => 2,
        Error::OracleLimit { .. } => 3,
        Error::InvalidConfig(_)
        | Error::InvalidInstance(_)
        | Error::Parse { .. }
        | Error::GenerationFailed { .. }
        | Error::Io(_) => 4,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.cmd {
        Cmd::Generate(a) => commands::generate(a),
        Cmd::Solve(a) => commands::solve(a),
        Cmd::Experiment(a) => experiment::run(a),
        Cmd::ExportLp(a) => commands::export_lp(a),
        Cmd::Check(a) => commands::check(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 4,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
