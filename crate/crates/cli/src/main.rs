//! `pvdr` — surrogate-assisted demand response, one workflow per subcommand.

mod commands;

use clap::{Parser, Subcommand};
use pvdr_core::{Classify, FailureKind};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(
    name = "pvdr",
    version,
    about = "Surrogate-assisted HVAC demand response: simulate, learn, exploit, report"
)]
struct Cli {
    /// Configuration file (building, policy, learner, scenario defaults).
    #[arg(long, global = true, default_value = "configs/default.toml")]
    config: PathBuf,

    /// Output directory; each run writes its resolved config and artifacts here.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Seed override for every randomized choice in the run.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Log progress to stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Thermo-resistor proof of concept: exhaustive sweeps plus 1-D and 2-D
    /// active-learning surrogates with error statistics.
    PocResistor(commands::poc::PocArgs),
    /// Train the single monolithic surrogate over all setpoint deltas and the
    /// external temperature, comparing corner and random initial designs.
    TrainMonolithic(commands::monolithic::MonolithicArgs),
    /// Replay the committee-driven controlled arm over a weather/PV horizon.
    RunScenario(commands::scenario_cmd::ScenarioArgs),
    /// Replay the fixed-setpoint baseline arm over the same horizon.
    Baseline(commands::scenario_cmd::ScenarioArgs),
    /// Re-train the committee at several thresholds and tabulate cost/quality.
    SweepThreshold(commands::sweep::SweepArgs),
    /// Compare a controlled and a baseline run from their emitted reports.
    Report(commands::report_cmd::ReportArgs),
}

fn exit_code_for(kind: FailureKind) -> ExitCode {
    match kind {
        FailureKind::Input => ExitCode::from(1),
        FailureKind::Numerical => ExitCode::from(2),
        FailureKind::Io => ExitCode::from(3),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let ctx = commands::Context {
        config_path: cli.config,
        out_dir: cli.out,
        seed: cli.seed,
    };
    let result = match cli.command {
        Command::PocResistor(args) => commands::poc::run(&ctx, &args),
        Command::TrainMonolithic(args) => commands::monolithic::run(&ctx, &args),
        Command::RunScenario(args) => commands::scenario_cmd::run(&ctx, &args, false),
        Command::Baseline(args) => commands::scenario_cmd::run(&ctx, &args, true),
        Command::SweepThreshold(args) => commands::sweep::run(&ctx, &args),
        Command::Report(args) => commands::report_cmd::run(&ctx, &args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            exit_code_for(e.kind())
        }
    }
}
