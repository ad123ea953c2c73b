//! Scratch calibration harness (not part of the artifact; used during
//! development to size lengthscales and simulation budgets).

use pvdr_core::config::AppConfig;
use pvdr_core::controller::ComfortPolicy;
use pvdr_core::gp::{GpModel, LengthscalePolicy, RbfKernel, Standardizer};
use pvdr_core::learner::{build_surrogate, InitStrategy, InputGrid, LearnerConfig};
use pvdr_core::thermal::{resistor_equilibrium, simulate_hour, ResistorParams, RoomState};
use std::time::Instant;

fn resistor() -> ResistorParams {
    ResistorParams {
        r_ohm: 10.0,
        alpha_per_k: 0.004,
        t_ref_k: 293.15,
        r_th_k_per_w: 0.001,
    }
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "all".into());

    if which == "6dprobe" {
        let ls: f64 = std::env::args().nth(2).map(|v| v.parse().unwrap()).unwrap_or(4.0);
        let app = AppConfig::default();
        let building = app.building_model().unwrap();
        let policy = ComfortPolicy::default();
        let grid = InputGrid::new(vec![vec![-1.0, 0.0, 1.0, 2.0]; 6]).unwrap();
        let points = grid.all_points();
        let bucket_temp = 9.5;
        let sim = |deltas: &[f64]| -> f64 {
            let setpoints: Vec<f64> = deltas
                .iter()
                .map(|d| (policy.surrogate_base_c + d).clamp(19.0, 24.0))
                .collect();
            let start = RoomState::from_temperatures(setpoints.clone());
            simulate_hour(&building, &setpoints, bucket_temp, &start, 60)
                .unwrap()
                .energy_kwh
        };
        let mut xs: Vec<Vec<f64>> = pvdr_core::learner::corner_design(&grid);
        let mut ys: Vec<f64> = xs.iter().map(|p| sim(p)).collect();
        let mut sampled: Vec<bool> = vec![false; grid.len()];
        for p in &xs {
            for (i, gp) in points.iter().enumerate() {
                if gp == p { sampled[i] = true; }
            }
        }
        let t0 = Instant::now();
        for iter in 0..1_000 {
            let model = GpModel::fit(&xs, &ys, &LengthscalePolicy::Fixed(ls), 1e-8).unwrap();
            let preds = model.predict(&points).unwrap();
            let (mut best_i, mut best_s, mut max_s) = (usize::MAX, -1.0, 0.0f64);
            for (i, p) in preds.iter().enumerate() {
                max_s = max_s.max(p.std);
                if !sampled[i] && p.std > best_s {
                    best_s = p.std;
                    best_i = i;
                }
            }
            if iter % 25 == 0 || max_s < 0.01 {
                eprintln!("iter={iter} n={} max_std={max_s:.4} t={:?}", xs.len(), t0.elapsed());
            }
            if max_s < 0.01 || best_i == usize::MAX {
                break;
            }
            sampled[best_i] = true;
            xs.push(points[best_i].clone());
            ys.push(sim(&points[best_i]));
        }
        return;
    }

    if which == "all" || which == "gp-freeze" {
        // Frozen oracle spot values for the 5-point 1-D set, lengthscale 0.7.
        let x: Vec<Vec<f64>> = [0.0, 1.0, 2.5, 3.0, 4.0].iter().map(|&v| vec![v]).collect();
        let y = vec![0.3, -0.8, 1.4, 1.1, -0.2];
        let model = GpModel::fit(&x, &y, &LengthscalePolicy::Fixed(0.7), 1e-8).unwrap();
        for raw in [0.5, 3.5] {
            let p = model.predict_one(&[raw]).unwrap();
            println!("gp-freeze raw={raw} mean={:?} std={:?}", p.mean, p.std);
        }
    }

    if which == "all" || which == "1d" {
        let params = resistor();
        let grid = InputGrid::new(vec![InputGrid::linspace_dim(10.0, 10_000.0, 1_000)]).unwrap();
        for ls_policy in [
            LengthscalePolicy::Fixed(0.3),
            LengthscalePolicy::Fixed(0.5),
            LengthscalePolicy::GridSearch { candidates: vec![0.2, 0.3, 0.5, 1.0, 2.0] },
        ] {
            let config = LearnerConfig {
                std_threshold: 0.01,
                init: InitStrategy::Random { k: 4, seed: 42 },
                lengthscale: ls_policy.clone(),
                ..LearnerConfig::default()
            };
            let t0 = Instant::now();
            let table = build_surrogate(&grid, &config, |p| {
                Ok(resistor_equilibrium(&params, p[0], 293.15).unwrap().current_a)
            })
            .unwrap();
            // exhaustive error
            let mut max_err = 0.0f64;
            let mut arg = 0.0;
            for (i, &pred) in table.predicted.iter().enumerate() {
                let truth = resistor_equilibrium(&params, grid.point(i)[0], 293.15)
                    .unwrap()
                    .current_a;
                let e = (pred - truth).abs() / truth.abs().max(1e-9);
                if e > max_err { max_err = e; arg = grid.point(i)[0]; }
            }
            println!(
                "1d ls={ls_policy:?} sims={} iters={} converged={} max_err={:.4}% at={arg:.0} time={:?}",
                table.simulation_count,
                table.iteration_count,
                table.converged,
                max_err * 100.0,
                t0.elapsed()
            );
        }
    }

    if which == "all" || which == "2d" {
        let params = resistor();
        let v2_min: f64 = std::env::args().nth(2).map(|v| v.parse().unwrap()).unwrap_or(10.0);
        let grid = InputGrid::new(vec![
            InputGrid::linspace_dim(v2_min, 10_000.0, 50),
            InputGrid::linspace_dim(273.15, 308.15, 50),
        ])
        .unwrap();
        for policy in [
            LengthscalePolicy::Fixed(0.3),
            LengthscalePolicy::Fixed(0.4),
            LengthscalePolicy::GridSearch { candidates: vec![0.2, 0.3, 0.5, 1.0, 2.0] },
            LengthscalePolicy::default_grid(),
        ] {
            let config = LearnerConfig {
                std_threshold: 0.01,
                init: InitStrategy::Random { k: 10, seed: 42 },
                lengthscale: policy.clone(),
                ..LearnerConfig::default()
            };
            let t0 = Instant::now();
            let table = build_surrogate(&grid, &config, |p| {
                Ok(resistor_equilibrium(&params, p[0], p[1]).unwrap().current_a)
            })
            .unwrap();
            let mut max_err = 0.0f64;
            let mut arg = vec![0.0, 0.0];
            let mut truth_at = 0.0;
            for (i, &pred) in table.predicted.iter().enumerate() {
                let pt = grid.point(i);
                let truth = resistor_equilibrium(&params, pt[0], pt[1]).unwrap().current_a;
                let e = (pred - truth).abs() / truth.abs().max(1e-9);
                if e > max_err { max_err = e; arg = pt; truth_at = truth; }
            }
            println!(
                "2d policy={policy:?} sims={} iters={} converged={} max_err={:.4}% at={arg:?} truth={truth_at:.2} time={:?}",
                table.simulation_count,
                table.iteration_count,
                table.converged,
                max_err * 100.0,
                t0.elapsed()
            );
        }
    }

    if which == "all" || which == "6d" {
        let app = AppConfig::default();
        let building = app.building_model().unwrap();
        let policy = ComfortPolicy::default();
        let grid = InputGrid::new(vec![vec![-1.0, 0.0, 1.0, 2.0]; 6]).unwrap();
        let bucket_temp = 9.5;
        for ls_policy in [
            LengthscalePolicy::Fixed(4.0),
            LengthscalePolicy::Fixed(6.0),
        ] {
            let config = LearnerConfig {
                std_threshold: 0.01,
                init: InitStrategy::Corners,
                lengthscale: ls_policy.clone(),
                max_iterations: Some(800),
                ..LearnerConfig::default()
            };
            let t0 = Instant::now();
            let mut sims = 0usize;
            let table = build_surrogate(&grid, &config, |deltas| {
                sims += 1;
                let setpoints: Vec<f64> = deltas
                    .iter()
                    .map(|d| (policy.surrogate_base_c + d).clamp(19.0, 24.0))
                    .collect();
                let start = RoomState::from_temperatures(setpoints.clone());
                Ok(simulate_hour(&building, &setpoints, bucket_temp, &start, 60)
                    .unwrap()
                    .energy_kwh)
            })
            .unwrap();
            // sample-based error check over 200 grid points
            let mut max_err = 0.0f64;
            for i in (0..grid.len()).step_by(20) {
                let pt = grid.point(i);
                let setpoints: Vec<f64> = pt
                    .iter()
                    .map(|d| (policy.surrogate_base_c + d).clamp(19.0, 24.0))
                    .collect();
                let start = RoomState::from_temperatures(setpoints.clone());
                let truth = simulate_hour(&building, &setpoints, bucket_temp, &start, 60)
                    .unwrap()
                    .energy_kwh;
                max_err = max_err.max((table.predicted[i] - truth).abs() / truth.abs().max(1e-9));
            }
            eprintln!(
                "6d policy={ls_policy:?} sims={} iters={} converged={} max_std={:.4} sampled_max_err={:.3}% time={:?}",
                table.simulation_count,
                table.iteration_count,
                table.converged,
                table.final_max_std,
                max_err * 100.0,
                t0.elapsed()
            );
        }
    }

    if which == "all" || which == "room2d" {
        // Single-room DR grid: T_ref 0..3, T_ext 0..15.
        let app = AppConfig::default();
        let building = pvdr_core::thermal::BuildingModel::new(vec![app.building.room[0].to_params()]).unwrap();
        let grid = InputGrid::new(vec![
            InputGrid::linspace_dim(0.0, 3.0, 13),
            InputGrid::linspace_dim(0.0, 15.0, 16),
        ])
        .unwrap();
        for ls in [1.0, 2.0] {
            let mut arms: Vec<(String, InitStrategy)> = vec![("corner".into(), InitStrategy::Corners)];
            for seed in 0..10u64 {
                arms.push((format!("rand{seed}"), InitStrategy::Random { k: 4, seed }));
            }
            for (label, init) in arms {
                let config = LearnerConfig {
                    std_threshold: 0.01,
                    init,
                    lengthscale: LengthscalePolicy::Fixed(ls),
                    ..LearnerConfig::default()
                };
                let table = build_surrogate(&grid, &config, |p| {
                    let start = RoomState::from_temperatures(vec![p[0]]);
                    Ok(simulate_hour(&building, &[p[0]], p[1], &start, 60)
                        .unwrap()
                        .energy_kwh)
                })
                .unwrap();
                eprintln!(
                    "room2d ls={ls} {label}: sims={} iters={} converged={}",
                    table.simulation_count, table.iteration_count, table.converged
                );
            }
        }
    }

    if which == "all" || which == "hour" {
        // Time one ground-truth hour and sanity-check the worked example.
        let app = AppConfig::default();
        let building = app.building_model().unwrap();
        let start = RoomState::uniform(&building, 21.0);
        let t0 = Instant::now();
        let mut acc = 0.0;
        for _ in 0..1_000 {
            acc += simulate_hour(&building, &[21.0; 6], 5.0, &start, 60).unwrap().energy_kwh;
        }
        println!("hour dt=60: {:?}/call energy {}", t0.elapsed() / 1_000, acc / 1_000.0);

        // Standardized span of the delta dims after corners only.
        let s = Standardizer::fit(&[vec![-1.0], vec![2.0]]).unwrap();
        let k = RbfKernel::isotropic(1.0, 1).unwrap();
        println!(
            "corner standardized at {:?}, k(-1,2)={}",
            (s.transform(&[-1.0]), s.transform(&[2.0])),
            k.eval(&s.transform(&[-1.0]), &s.transform(&[2.0]))
        );
    }
}
