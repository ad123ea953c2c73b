//! The `sweep-threshold` subcommand: committee training cost and surrogate
//! quality as a function of the convergence threshold.

use super::{write_text, CmdError, Context};
use clap::Args;
use pvdr_core::scenario::{load_weather, sweep_threshold, ScenarioConfig};
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Thresholds to sweep, e.g. `0.01,0.02,0.03,0.05`.
    #[arg(value_delimiter = ',', required = true)]
    pub thresholds: Vec<f64>,

    /// Weather CSV; defaults to the config value.
    #[arg(long)]
    pub weather: Option<PathBuf>,

    /// Hours of weather to replay (0 = whole series).
    #[arg(long)]
    pub horizon: Option<usize>,

    /// Also simulate every member grid point exhaustively to measure the
    /// true maximum relative error (slow).
    #[arg(long, default_value_t = false)]
    pub exhaustive_error: bool,
}

pub fn run(ctx: &Context, args: &SweepArgs) -> Result<(), CmdError> {
    let config = ctx.load_config()?;
    let dir = ctx.prepare_out(Some("sweep"), &config)?;
    let weather_path = args
        .weather
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.scenario.weather_file));
    let weather = load_weather(&weather_path)?;

    let building = config.building_model()?;
    let learner = config.learner.to_learner_config(building.room_count())?;
    let scenario = ScenarioConfig {
        building,
        policy: config.policy.to_policy(),
        learner,
        horizon_hours: args.horizon.unwrap_or(config.scenario.horizon_hours),
        baseline_setpoint_c: config.scenario.baseline_setpoint_c,
        timestep_s: config.scenario.timestep_s,
        seed: ctx.seed.unwrap_or(config.scenario.seed),
        allow_unconverged: config.scenario.allow_unconverged,
    };

    let rows = sweep_threshold(&scenario, &weather, &args.thresholds, args.exhaustive_error)?;

    let mut csv = String::from("threshold,models,total_sims,training_wall_s,max_grid_error_pct\n");
    for row in &rows {
        let err = row
            .max_grid_error
            .map(|e| (e * 100.0).to_string())
            .unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{:.6},{}",
            row.threshold, row.models_created, row.total_simulations, row.training_wall_s, err
        );
    }
    write_text(&dir, "sweep.csv", &csv)?;

    println!("threshold  models  total_sims  wall_s     max_err_pct");
    for row in &rows {
        println!(
            "{:<10} {:<7} {:<11} {:<10.3} {}",
            row.threshold,
            row.models_created,
            row.total_simulations,
            row.training_wall_s,
            row.max_grid_error
                .map(|e| format!("{:.3}", e * 100.0))
                .unwrap_or_else(|| "-".into())
        );
    }
    Ok(())
}
