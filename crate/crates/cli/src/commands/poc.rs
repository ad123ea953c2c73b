//! The thermo-resistor proof of concept.
//!
//! Runs the exhaustive 1-D voltage sweep and the exhaustive 2-D
//! voltage-by-ambient sweep, builds an active-learning surrogate for each,
//! and writes both alongside error statistics. The exhaustive sweeps are what
//! make the surrogate's accuracy checkable point by point.

use super::{write_text, CmdError, Context};
use clap::Args;
use pvdr_core::gp::LengthscalePolicy;
use pvdr_core::learner::{
    build_surrogate, write_table, InitStrategy, InputGrid, LearnerConfig, SurrogateTable,
};
use pvdr_core::thermal::{resistor_equilibrium, sweep_resistor, ResistorParams};
use std::fmt::Write as _;
use std::time::Instant;

#[derive(Debug, Args)]
pub struct PocArgs {
    /// Max-std convergence threshold for both surrogates.
    #[arg(long, default_value_t = 0.01)]
    pub threshold: f64,

    /// Points in the 1-D voltage grid.
    #[arg(long, default_value_t = 1_000)]
    pub v_points: usize,

    /// Points per dimension of the 2-D grid.
    #[arg(long, default_value_t = 50)]
    pub grid: usize,

    /// Random initial points for the 1-D surrogate.
    #[arg(long, default_value_t = 4)]
    pub init_1d: usize,

    /// Random initial points for the 2-D surrogate.
    #[arg(long, default_value_t = 10)]
    pub init_2d: usize,
}

pub struct PocOutcome {
    pub sims_1d: usize,
    pub max_err_1d: f64,
    pub sims_2d: usize,
    pub max_err_2d: f64,
}

fn max_relative_error(table: &SurrogateTable, truth: &[f64]) -> f64 {
    table
        .predicted
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t).abs() / t.abs().max(1e-9))
        .fold(0.0, f64::max)
}

pub fn run(ctx: &Context, args: &PocArgs) -> Result<(), CmdError> {
    let config = ctx.load_config()?;
    let dir = ctx.prepare_out(Some("poc"), &config)?;
    let params = config.resistor.to_params();
    let seed = ctx.seed.unwrap_or(config.scenario.seed);
    let outcome = run_poc(&params, &config, args, seed, &dir)?;
    println!(
        "1-D surrogate: {} simulations, max relative error {:.3} %",
        outcome.sims_1d,
        outcome.max_err_1d * 100.0
    );
    println!(
        "2-D surrogate: {} simulations, max relative error {:.3} %",
        outcome.sims_2d,
        outcome.max_err_2d * 100.0
    );
    Ok(())
}

pub fn run_poc(
    params: &ResistorParams,
    config: &pvdr_core::config::AppConfig,
    args: &PocArgs,
    seed: u64,
    dir: &std::path::Path,
) -> Result<PocOutcome, CmdError> {
    let r = &config.resistor;
    let mut summary = String::new();

    // 1-D: exhaustive sweep over the full voltage range.
    let grid_1d = InputGrid::new(vec![InputGrid::linspace_dim(r.v_min, r.v_max, args.v_points)])?;
    let voltages: Vec<f64> = grid_1d.dim_values(0).to_vec();
    let sweep_started = Instant::now();
    let sweep = sweep_resistor(params, &voltages, r.ambient_k)?;
    let sweep_elapsed = sweep_started.elapsed();

    let mut sweep_csv = String::from("voltage,current,resistance,heatport_temp\n");
    for (v, eq) in voltages.iter().zip(&sweep) {
        let _ = writeln!(
            sweep_csv,
            "{},{},{},{}",
            v, eq.current_a, eq.r_eq_ohm, eq.heatport_temp_k
        );
    }
    write_text(dir, "resistor_sweep.csv", &sweep_csv)?;

    let config_1d = LearnerConfig {
        std_threshold: args.threshold,
        init: InitStrategy::Random { k: args.init_1d, seed },
        lengthscale: LengthscalePolicy::Fixed(r.lengthscale_1d),
        ..LearnerConfig::default()
    };
    let learn_started = Instant::now();
    let table_1d = build_surrogate(&grid_1d, &config_1d, |p| {
        Ok(resistor_equilibrium(params, p[0], r.ambient_k)
            .map_err(Box::new)?
            .current_a)
    })?;
    let learn_1d_elapsed = learn_started.elapsed();
    let truth_1d: Vec<f64> = sweep.iter().map(|eq| eq.current_a).collect();
    let max_err_1d = max_relative_error(&table_1d, &truth_1d);
    write_table(&table_1d, &dir.join("poc1d_table.txt"))?;

    let _ = writeln!(summary, "poc1d_grid_points = {}", grid_1d.len());
    let _ = writeln!(summary, "poc1d_simulations = {}", table_1d.simulation_count);
    let _ = writeln!(summary, "poc1d_iterations = {}", table_1d.iteration_count);
    let _ = writeln!(summary, "poc1d_converged = {}", table_1d.converged);
    let _ = writeln!(summary, "poc1d_final_max_std = {}", table_1d.final_max_std);
    let _ = writeln!(summary, "poc1d_max_rel_error_pct = {}", max_err_1d * 100.0);

    // 2-D: voltage crossed with ambient temperature.
    let grid_2d = InputGrid::new(vec![
        InputGrid::linspace_dim(r.v2_min, r.v_max, args.grid),
        InputGrid::linspace_dim(r.t_min_c + 273.15, r.t_max_c + 273.15, args.grid),
    ])?;
    let points_2d = grid_2d.all_points();
    let exhaustive_started = Instant::now();
    let truth_2d: Vec<f64> = points_2d
        .iter()
        .map(|p| resistor_equilibrium(params, p[0], p[1]).map(|eq| eq.current_a))
        .collect::<Result<_, _>>()?;
    let exhaustive_elapsed = exhaustive_started.elapsed();

    let mut exhaustive_csv = String::from("voltage,ambient_k,current\n");
    for (p, i) in points_2d.iter().zip(&truth_2d) {
        let _ = writeln!(exhaustive_csv, "{},{},{}", p[0], p[1], i);
    }
    write_text(dir, "poc2d_exhaustive.csv", &exhaustive_csv)?;

    let config_2d = LearnerConfig {
        std_threshold: args.threshold,
        init: InitStrategy::Random { k: args.init_2d, seed },
        lengthscale: LengthscalePolicy::GridSearch {
            candidates: r.lengthscale_grid_2d.clone(),
        },
        ..LearnerConfig::default()
    };
    let learn_started = Instant::now();
    let table_2d = build_surrogate(&grid_2d, &config_2d, |p| {
        Ok(resistor_equilibrium(params, p[0], p[1])
            .map_err(Box::new)?
            .current_a)
    })?;
    let learn_2d_elapsed = learn_started.elapsed();
    let max_err_2d = max_relative_error(&table_2d, &truth_2d);
    write_table(&table_2d, &dir.join("poc2d_table.txt"))?;

    let _ = writeln!(summary, "poc2d_grid_points = {}", grid_2d.len());
    let _ = writeln!(summary, "poc2d_simulations = {}", table_2d.simulation_count);
    let _ = writeln!(summary, "poc2d_iterations = {}", table_2d.iteration_count);
    let _ = writeln!(summary, "poc2d_converged = {}", table_2d.converged);
    let _ = writeln!(summary, "poc2d_final_max_std = {}", table_2d.final_max_std);
    let _ = writeln!(summary, "poc2d_max_rel_error_pct = {}", max_err_2d * 100.0);
    write_text(dir, "poc_summary.txt", &summary)?;

    let mut timings = String::from("# wall-clock measurements; expect run-to-run variation\n");
    let _ = writeln!(timings, "sweep_1d_s = {:.6}", sweep_elapsed.as_secs_f64());
    let _ = writeln!(timings, "learn_1d_s = {:.6}", learn_1d_elapsed.as_secs_f64());
    let _ = writeln!(timings, "exhaustive_2d_s = {:.6}", exhaustive_elapsed.as_secs_f64());
    let _ = writeln!(timings, "learn_2d_s = {:.6}", learn_2d_elapsed.as_secs_f64());
    write_text(dir, "timings.txt", &timings)?;

    Ok(PocOutcome {
        sims_1d: table_1d.simulation_count,
        max_err_1d,
        sims_2d: table_2d.simulation_count,
        max_err_2d,
    })
}
