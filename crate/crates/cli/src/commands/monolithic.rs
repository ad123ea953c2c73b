//! The single monolithic surrogate over all inputs.
//!
//! Seven dimensions: one setpoint delta per room plus the external
//! temperature, trained once over the whole temperature interval. Both the
//! corner initial design (2^7 points) and seeded random designs of the same
//! size are run so the convergence cost of each strategy can be compared.

use super::{write_text, CmdError, Context};
use clap::Args;
use pvdr_core::learner::{compare_init_strategies, write_table, InputGrid};
use pvdr_core::learner::{build_surrogate, InitStrategy, LearnerConfig};
use pvdr_core::thermal::{simulate_hour, RoomState};
use std::fmt::Write as _;

#[derive(Debug, Args)]
pub struct MonolithicArgs {
    /// Max-std convergence threshold.
    #[arg(long, default_value_t = 0.01)]
    pub threshold: f64,

    /// Seeds of the random-init arm.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub seeds: Vec<u64>,

    /// External-temperature dimension: lower bound [°C].
    #[arg(long, default_value_t = 5.0)]
    pub t_ext_min: f64,

    /// External-temperature dimension: upper bound [°C].
    #[arg(long, default_value_t = 15.0)]
    pub t_ext_max: f64,

    /// External-temperature dimension: step [°C].
    #[arg(long, default_value_t = 1.0)]
    pub t_ext_step: f64,

    /// Cap on acquisition iterations per arm.
    #[arg(long, default_value_t = 2_000)]
    pub max_iterations: usize,
}

pub fn run(ctx: &Context, args: &MonolithicArgs) -> Result<(), CmdError> {
    let config = ctx.load_config()?;
    let dir = ctx.prepare_out(Some("monolithic"), &config)?;
    let building = config.building_model()?;
    let policy = config.policy.to_policy();
    let timestep = config.scenario.timestep_s;

    let steps = ((args.t_ext_max - args.t_ext_min) / args.t_ext_step).round() as usize + 1;
    let t_ext_values: Vec<f64> = (0..steps)
        .map(|i| args.t_ext_min + i as f64 * args.t_ext_step)
        .collect();
    let mut dims = vec![vec![-1.0, 0.0, 1.0, 2.0]; building.room_count()];
    dims.push(t_ext_values);
    let grid = InputGrid::new(dims)?;
    log::info!(
        "monolithic grid: {} rooms x 4 deltas + {} temperatures = {} combinations",
        building.room_count(),
        grid.dim_values(building.room_count()).len(),
        grid.len()
    );

    let mut learner = config.learner.to_learner_config(grid.dims())?;
    learner.std_threshold = args.threshold;
    learner.max_iterations = Some(args.max_iterations);

    let rooms = building.room_count();
    let simulator = |point: &[f64]| {
        let t_ext = point[rooms];
        let setpoints: Vec<f64> = point[..rooms]
            .iter()
            .map(|d| {
                (policy.surrogate_base_c + d).clamp(policy.comfort_floor_c, policy.comfort_ceiling_c)
            })
            .collect();
        let start = RoomState::from_temperatures(setpoints.clone());
        Ok(simulate_hour(&building, &setpoints, t_ext, &start, timestep)
            .map_err(Box::new)?
            .energy_kwh)
    };

    let comparison = compare_init_strategies(&grid, &learner, simulator, &args.seeds)?;

    // Persist the corner-arm table as the monolithic surrogate artifact.
    let corner_config = LearnerConfig {
        init: InitStrategy::Corners,
        ..learner.clone()
    };
    let table = build_surrogate(&grid, &corner_config, simulator)?;
    write_table(&table, &dir.join("monolithic_table.txt"))?;

    let mut csv = String::from("arm,seed,initial_design,iterations,total_sims,final_max_std,converged\n");
    let _ = writeln!(
        csv,
        "corner,,{},{},{},{},{}",
        comparison.corner.initial_design,
        comparison.corner.iterations,
        comparison.corner.simulation_count,
        comparison.corner.final_max_std,
        comparison.corner.converged
    );
    for arm in &comparison.random {
        let _ = writeln!(
            csv,
            "random,{},{},{},{},{},{}",
            arm.seed.unwrap_or_default(),
            arm.initial_design,
            arm.iterations,
            arm.simulation_count,
            arm.final_max_std,
            arm.converged
        );
    }
    write_text(&dir, "init_comparison.csv", &csv)?;

    let median = comparison.random_median_iterations();
    let mut summary = String::new();
    let _ = writeln!(summary, "grid_combinations = {}", grid.len());
    let _ = writeln!(summary, "corner_initial_design = {}", comparison.corner.initial_design);
    let _ = writeln!(summary, "corner_iterations = {}", comparison.corner.iterations);
    let _ = writeln!(summary, "corner_total_sims = {}", comparison.corner.simulation_count);
    let _ = writeln!(summary, "random_median_iterations = {median}");
    let _ = writeln!(
        summary,
        "corner_grid_fraction_pct = {}",
        comparison.corner.simulation_count as f64 / grid.len() as f64 * 100.0
    );
    write_text(&dir, "monolithic_summary.txt", &summary)?;

    println!(
        "corner init: {} iterations ({} total sims, {:.2} % of the grid)",
        comparison.corner.iterations,
        comparison.corner.simulation_count,
        comparison.corner.simulation_count as f64 / grid.len() as f64 * 100.0
    );
    println!("random init: median {median} iterations over {} seeds", args.seeds.len());
    Ok(())
}
