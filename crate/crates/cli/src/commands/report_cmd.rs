//! The `report` subcommand: rebuilds both arms' ledgers from their emitted
//! hourly CSVs and writes the controlled-vs-baseline comparison.

use super::{CmdError, Context};
use clap::Args;
use pvdr_core::metrics::compare;
use pvdr_core::scenario::{emit_comparison, read_hourly_ledger};
use std::path::PathBuf;

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory holding the controlled arm's `hourly.csv` (defaults to
    /// `<out>/controlled`).
    #[arg(long)]
    pub controlled: Option<PathBuf>,

    /// Directory holding the baseline arm's `hourly.csv` (defaults to
    /// `<out>/baseline`).
    #[arg(long)]
    pub baseline: Option<PathBuf>,
}

pub fn run(ctx: &Context, args: &ReportArgs) -> Result<(), CmdError> {
    let controlled_dir = args
        .controlled
        .clone()
        .unwrap_or_else(|| ctx.out_dir.join("controlled"));
    let baseline_dir = args
        .baseline
        .clone()
        .unwrap_or_else(|| ctx.out_dir.join("baseline"));

    let controlled = read_hourly_ledger(&controlled_dir.join("hourly.csv"))?;
    let baseline = read_hourly_ledger(&baseline_dir.join("hourly.csv"))?;
    let summary = compare(&controlled, &baseline)?;
    emit_comparison(&summary, &ctx.out_dir)?;

    print!(
        "{}",
        std::fs::read_to_string(ctx.out_dir.join("comparison.txt")).map_err(|source| {
            CmdError::Io {
                path: ctx.out_dir.join("comparison.txt").display().to_string(),
                source,
            }
        })?
    );
    Ok(())
}
