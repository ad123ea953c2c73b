//! Active-learning surrogate construction.
//!
//! The loop: simulate an initial design (grid corners or a seeded random
//! subset), fit the GP, predict the whole grid, and keep simulating the most
//! uncertain unsampled grid point until the grid-wide maximum standard
//! deviation drops below the threshold. The product is a [`SurrogateTable`]:
//! a dense predicted output over the finite input grid, cheap to look up in
//! place of the simulator.

mod table;

pub use table::{read_table, write_table, TableIoError};

use crate::gp::{GpError, GpModel, LengthscalePolicy, DEFAULT_JITTER};
use crate::{Classify, FailureKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Boxed simulator failure carried through the learner.
pub type SimFailure = Box<dyn std::error::Error + Send + Sync + 'static>;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid learner config: {0}")]
    InvalidConfig(String),
    #[error("design of {requested} points exceeds grid size {grid}")]
    DesignTooLarge { requested: usize, grid: usize },
    #[error("simulator failed after {completed} successful calls: {source}")]
    Simulator {
        completed: usize,
        #[source]
        source: SimFailure,
    },
    #[error(transparent)]
    Gp(#[from] GpError),
}

impl Classify for LearnError {
    fn kind(&self) -> FailureKind {
        match self {
            LearnError::InvalidGrid(_)
            | LearnError::InvalidConfig(_)
            | LearnError::DesignTooLarge { .. } => FailureKind::Input,
            LearnError::Simulator { .. } => FailureKind::Numerical,
            LearnError::Gp(e) => e.kind(),
        }
    }
}

/// A finite rectangular grid: one ordered value list per input dimension.
/// Grid points are indexed lexicographically with dimension 0 most
/// significant.
#[derive(Debug, Clone, PartialEq)]
pub struct InputGrid {
    dims: Vec<Vec<f64>>,
}

impl InputGrid {
    pub fn new(dims: Vec<Vec<f64>>) -> Result<Self, LearnError> {
        if dims.is_empty() {
            return Err(LearnError::InvalidGrid("grid needs at least one dimension".into()));
        }
        for (i, values) in dims.iter().enumerate() {
            if values.len() < 2 {
                return Err(LearnError::InvalidGrid(format!(
                    "dimension {i} needs at least 2 values"
                )));
            }
            if values.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(LearnError::InvalidGrid(format!(
                    "dimension {i} must be strictly increasing"
                )));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(LearnError::InvalidGrid(format!(
                    "dimension {i} holds non-finite values"
                )));
            }
        }
        let grid = Self { dims };
        if grid.len() < 4 {
            return Err(LearnError::InvalidGrid("grid must hold at least 4 points".into()));
        }
        Ok(grid)
    }

    /// Evenly spaced helper: `points` values from `lo` to `hi` inclusive.
    pub fn linspace_dim(lo: f64, hi: f64, points: usize) -> Vec<f64> {
        (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect()
    }

    pub fn dims(&self) -> usize {
        self.dims.len()
    }

    pub fn dim_values(&self, dim: usize) -> &[f64] {
        &self.dims[dim]
    }

    /// Total number of grid points (product of dimension lengths).
    pub fn len(&self) -> usize {
        self.dims.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid point at a lexicographic index.
    pub fn point(&self, mut index: usize) -> Vec<f64> {
        debug_assert!(index < self.len());
        let mut coords = vec![0.0; self.dims()];
        for (dim, values) in self.dims.iter().enumerate().rev() {
            coords[dim] = values[index % values.len()];
            index /= values.len();
        }
        coords
    }

    /// Lexicographic index of a point given per-dimension value indices.
    pub fn index_of(&self, value_indices: &[usize]) -> usize {
        debug_assert_eq!(value_indices.len(), self.dims());
        let mut index = 0;
        for (values, &i) in self.dims.iter().zip(value_indices) {
            debug_assert!(i < values.len());
            index = index * values.len() + i;
        }
        index
    }

    /// Materializes every grid point in lexicographic order.
    pub fn all_points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

/// Initial-design strategy for [`build_surrogate`].
#[derive(Debug, Clone, PartialEq)]
pub enum InitStrategy {
    /// All 2^d combinations of each dimension's min and max.
    Corners,
    /// `k` distinct grid points drawn without replacement from `seed`.
    Random { k: usize, seed: u64 },
}

/// Configuration of the active-learning loop.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    /// Stop once the grid-wide max predictive std falls below this
    /// (standardized units). Values >= 1 short-circuit the loop after the
    /// initial design.
    pub std_threshold: f64,
    pub init: InitStrategy,
    /// Cap on acquisition iterations; `None` means the grid size.
    pub max_iterations: Option<usize>,
    pub lengthscale: LengthscalePolicy,
    pub jitter: f64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            std_threshold: 0.01,
            init: InitStrategy::Corners,
            max_iterations: None,
            lengthscale: LengthscalePolicy::default(),
            jitter: DEFAULT_JITTER,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<(), LearnError> {
        if !(self.std_threshold > 0.0 && self.std_threshold.is_finite()) {
            return Err(LearnError::InvalidConfig(format!(
                "std_threshold must be positive and finite, got {}",
                self.std_threshold
            )));
        }
        if !(self.jitter > 0.0) {
            return Err(LearnError::InvalidConfig(format!(
                "jitter must be > 0, got {}",
                self.jitter
            )));
        }
        Ok(())
    }
}

/// Dense surrogate over a grid plus the training evidence behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateTable {
    pub grid: InputGrid,
    /// Predicted output per grid point, in output units, lexicographic order.
    pub predicted: Vec<f64>,
    /// Grid-wide max predictive std at the final fit (standardized units).
    pub final_max_std: f64,
    pub training_inputs: Vec<Vec<f64>>,
    pub training_outputs: Vec<f64>,
    /// Simulations performed after the initial design.
    pub iteration_count: usize,
    /// Total simulator calls: initial design + iterations.
    pub simulation_count: usize,
    /// Whether the std threshold was reached.
    pub converged: bool,
    /// The config the table was built under.
    pub config: LearnerConfig,
}

impl SurrogateTable {
    /// Predicted output at a grid point given per-dimension value indices.
    pub fn lookup(&self, value_indices: &[usize]) -> f64 {
        self.predicted[self.grid.index_of(value_indices)]
    }
}

/// All 2^d corner points (every min/max combination), lexicographic order.
pub fn corner_design(grid: &InputGrid) -> Vec<Vec<f64>> {
    corner_indices(grid).iter().map(|&i| grid.point(i)).collect()
}

fn corner_indices(grid: &InputGrid) -> Vec<usize> {
    let d = grid.dims();
    let mut out = Vec::with_capacity(1 << d);
    for mask in 0..(1usize << d) {
        let value_indices: Vec<usize> = (0..d)
            .map(|dim| {
                // Bit 0 of the mask drives the last dimension so the output
                // order is lexicographic in the point coordinates.
                if mask >> (d - 1 - dim) & 1 == 1 {
                    grid.dim_values(dim).len() - 1
                } else {
                    0
                }
            })
            .collect();
        out.push(grid.index_of(&value_indices));
    }
    out
}

/// `k` distinct grid points, reproducible under `seed`.
pub fn random_design(grid: &InputGrid, k: usize, seed: u64) -> Result<Vec<Vec<f64>>, LearnError> {
    Ok(random_indices(grid, k, seed)?
        .iter()
        .map(|&i| grid.point(i))
        .collect())
}

fn random_indices(grid: &InputGrid, k: usize, seed: u64) -> Result<Vec<usize>, LearnError> {
    if k > grid.len() {
        return Err(LearnError::DesignTooLarge {
            requested: k,
            grid: grid.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rand::seq::index::sample(&mut rng, grid.len(), k).into_vec())
}

/// The unsampled grid point with the highest predictive std; ties break
/// toward the lowest lexicographic grid index. `None` once every point is
/// sampled.
pub fn acquire_next(
    model: &GpModel,
    grid: &InputGrid,
    sampled: &[bool],
) -> Result<Option<(usize, Vec<f64>)>, LearnError> {
    let points = grid.all_points();
    let preds = model.predict(&points)?;
    Ok(argmax_unsampled(&preds.iter().map(|p| p.std).collect::<Vec<_>>(), sampled)
        .map(|idx| (idx, grid.point(idx))))
}

fn argmax_unsampled(stds: &[f64], sampled: &[bool]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (idx, &std) in stds.iter().enumerate() {
        if sampled[idx] {
            continue;
        }
        match best {
            Some((_, best_std)) if std <= best_std => {}
            _ => best = Some((idx, std)),
        }
    }
    best.map(|(idx, _)| idx)
}

/// Runs the full active-learning loop against a black-box simulator.
///
/// Returns a table flagged `converged: false` (not an error) when the
/// iteration cap or grid exhaustion is reached before the threshold.
pub fn build_surrogate<F>(
    grid: &InputGrid,
    config: &LearnerConfig,
    mut simulator: F,
) -> Result<SurrogateTable, LearnError>
where
    F: FnMut(&[f64]) -> Result<f64, SimFailure>,
{
    config.validate()?;
    let initial = match &config.init {
        InitStrategy::Corners => corner_indices(grid),
        InitStrategy::Random { k, seed } => random_indices(grid, *k, *seed)?,
    };
    let max_iterations = config.max_iterations.unwrap_or_else(|| grid.len());

    let mut sampled = vec![false; grid.len()];
    let mut training_inputs: Vec<Vec<f64>> = Vec::new();
    let mut training_outputs: Vec<f64> = Vec::new();
    let mut simulate = |idx: usize,
                        inputs: &mut Vec<Vec<f64>>,
                        outputs: &mut Vec<f64>,
                        sampled: &mut Vec<bool>|
     -> Result<(), LearnError> {
        let point = grid.point(idx);
        let y = simulator(&point).map_err(|source| LearnError::Simulator {
            completed: inputs.len(),
            source,
        })?;
        sampled[idx] = true;
        inputs.push(point);
        outputs.push(y);
        Ok(())
    };

    for idx in initial {
        if !sampled[idx] {
            simulate(idx, &mut training_inputs, &mut training_outputs, &mut sampled)?;
        }
    }
    let initial_count = training_inputs.len();

    let grid_points = grid.all_points();
    let mut iterations = 0usize;
    loop {
        // Refit from scratch: standardization stats are recomputed on every
        // append, so the threshold always refers to the current unit variance.
        let model = GpModel::fit(
            &training_inputs,
            &training_outputs,
            &config.lengthscale,
            config.jitter,
        )?;
        let preds = model.predict(&grid_points)?;
        let stds: Vec<f64> = preds.iter().map(|p| p.std).collect();
        let max_std = stds.iter().copied().fold(0.0f64, f64::max);

        let finish = |converged: bool| -> SurrogateTable {
            SurrogateTable {
                grid: grid.clone(),
                predicted: preds
                    .iter()
                    .map(|p| model.destandardize_mean(p.mean))
                    .collect(),
                final_max_std: max_std,
                training_inputs: training_inputs.clone(),
                training_outputs: training_outputs.clone(),
                iteration_count: iterations,
                simulation_count: initial_count + iterations,
                converged,
                config: config.clone(),
            }
        };

        if max_std < config.std_threshold {
            return Ok(finish(true));
        }
        if iterations >= max_iterations {
            return Ok(finish(false));
        }
        let Some(next) = argmax_unsampled(&stds, &sampled) else {
            // Grid exhausted while still above threshold.
            return Ok(finish(false));
        };
        simulate(next, &mut training_inputs, &mut training_outputs, &mut sampled)?;
        iterations += 1;
    }
}

/// Iteration counts of one init-strategy arm.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmResult {
    pub seed: Option<u64>,
    pub initial_design: usize,
    pub iterations: usize,
    pub simulation_count: usize,
    pub final_max_std: f64,
    pub converged: bool,
}

/// Corner-vs-random comparison report.
#[derive(Debug, Clone, PartialEq)]
pub struct InitComparison {
    pub corner: ArmResult,
    pub random: Vec<ArmResult>,
}

impl InitComparison {
    /// Median of the random arm's iteration counts.
    pub fn random_median_iterations(&self) -> f64 {
        let mut counts: Vec<usize> = self.random.iter().map(|a| a.iterations).collect();
        counts.sort_unstable();
        let n = counts.len();
        if n == 0 {
            return f64::NAN;
        }
        if n % 2 == 1 {
            counts[n / 2] as f64
        } else {
            (counts[n / 2 - 1] + counts[n / 2]) as f64 / 2.0
        }
    }
}

/// Builds the surrogate under corner init and under random init (one run per
/// seed, each with the same design size 2^d as the corner arm), reporting the
/// iteration counts of each arm.
pub fn compare_init_strategies<F>(
    grid: &InputGrid,
    config: &LearnerConfig,
    mut simulator: F,
    seeds: &[u64],
) -> Result<InitComparison, LearnError>
where
    F: FnMut(&[f64]) -> Result<f64, SimFailure>,
{
    if seeds.is_empty() {
        return Err(LearnError::InvalidConfig(
            "need at least one seed for the random arm".into(),
        ));
    }
    let corner_config = LearnerConfig {
        init: InitStrategy::Corners,
        ..config.clone()
    };
    let corner_table = build_surrogate(grid, &corner_config, &mut simulator)?;
    let corner = ArmResult {
        seed: None,
        initial_design: corner_table.simulation_count - corner_table.iteration_count,
        iterations: corner_table.iteration_count,
        simulation_count: corner_table.simulation_count,
        final_max_std: corner_table.final_max_std,
        converged: corner_table.converged,
    };

    let k = 1usize << grid.dims();
    let mut random = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let random_config = LearnerConfig {
            init: InitStrategy::Random { k, seed },
            ..config.clone()
        };
        let table = build_surrogate(grid, &random_config, &mut simulator)?;
        random.push(ArmResult {
            seed: Some(seed),
            initial_design: table.simulation_count - table.iteration_count,
            iterations: table.iteration_count,
            simulation_count: table.simulation_count,
            final_max_std: table.final_max_std,
            converged: table.converged,
        });
    }
    Ok(InitComparison { corner, random })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::LengthscalePolicy;
    use crate::thermal::{resistor_equilibrium, ResistorParams};
    use std::cell::RefCell;
    use std::collections::HashSet;

    fn poc_resistor() -> ResistorParams {
        ResistorParams {
            r_ohm: 10.0,
            alpha_per_k: 0.004,
            t_ref_k: 293.15,
            r_th_k_per_w: 0.001,
        }
    }

    fn single_room_grid() -> InputGrid {
        InputGrid::new(vec![
            InputGrid::linspace_dim(0.0, 3.0, 13),
            InputGrid::linspace_dim(0.0, 15.0, 16),
        ])
        .unwrap()
    }

    #[test]
    fn grid_indexing_round_trips() {
        let grid = InputGrid::new(vec![vec![1.0, 2.0, 3.0], vec![10.0, 20.0]]).unwrap();
        assert_eq!(grid.len(), 6);
        assert_eq!(grid.point(0), vec![1.0, 10.0]);
        assert_eq!(grid.point(1), vec![1.0, 20.0]);
        assert_eq!(grid.point(5), vec![3.0, 20.0]);
        assert_eq!(grid.index_of(&[2, 1]), 5);
    }

    #[test]
    fn invalid_grids_are_rejected() {
        assert!(InputGrid::new(vec![]).is_err());
        assert!(InputGrid::new(vec![vec![1.0]]).is_err());
        assert!(InputGrid::new(vec![vec![2.0, 1.0], vec![0.0, 1.0]]).is_err());
        // 2 x 1 = 2 points < 4 is impossible since dims need >= 2 values,
        // but a single 2-value dim gives only 2 points.
        assert!(InputGrid::new(vec![vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn corner_design_enumerates_min_max_combinations() {
        // The single-room reproduction grid: T_ref in [0, 3], T_ext in [0, 15].
        let corners = corner_design(&single_room_grid());
        assert_eq!(
            corners,
            vec![
                vec![0.0, 0.0],
                vec![0.0, 15.0],
                vec![3.0, 0.0],
                vec![3.0, 15.0]
            ]
        );

        let grid7 = InputGrid::new(vec![vec![-1.0, 0.0, 1.0, 2.0]; 7]).unwrap();
        let corners7 = corner_design(&grid7);
        assert_eq!(corners7.len(), 128);
        let distinct: HashSet<Vec<u64>> = corners7
            .iter()
            .map(|p| p.iter().map(|v| v.to_bits()).collect())
            .collect();
        assert_eq!(distinct.len(), 128);

        let grid1 = InputGrid::new(vec![InputGrid::linspace_dim(10.0, 10_000.0, 1_000)]).unwrap();
        assert_eq!(corner_design(&grid1), vec![vec![10.0], vec![10_000.0]]);
    }

    #[test]
    fn random_design_is_seeded_and_distinct() {
        let grid = InputGrid::new(vec![
            InputGrid::linspace_dim(0.0, 1.0, 50),
            InputGrid::linspace_dim(0.0, 1.0, 50),
        ])
        .unwrap();
        let a = random_design(&grid, 10, 7).unwrap();
        let b = random_design(&grid, 10, 7).unwrap();
        assert_eq!(a, b);
        let distinct: HashSet<Vec<u64>> = a
            .iter()
            .map(|p| p.iter().map(|v| v.to_bits()).collect())
            .collect();
        assert_eq!(distinct.len(), 10);

        let small = InputGrid::new(vec![vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let all = random_design(&small, 4, 3).unwrap();
        assert_eq!(all.len(), 4);
        assert!(matches!(
            random_design(&small, 5, 3),
            Err(LearnError::DesignTooLarge { requested: 5, grid: 4 })
        ));
    }

    #[test]
    fn acquisition_prefers_uncovered_regions() {
        // Train on the left half of a 1-D grid; the acquired point must lie
        // in the right half (uncertainty grows with distance).
        let grid = InputGrid::new(vec![InputGrid::linspace_dim(0.0, 10.0, 21)]).unwrap();
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 * 0.5]).collect();
        let y: Vec<f64> = x.iter().map(|p| p[0].sin()).collect();
        let model = GpModel::fit(&x, &y, &LengthscalePolicy::Fixed(1.0), DEFAULT_JITTER).unwrap();
        let mut sampled = vec![false; grid.len()];
        for (i, v) in grid.dim_values(0).iter().enumerate() {
            if *v <= 3.5 {
                sampled[i] = true;
            }
        }
        let (idx, point) = acquire_next(&model, &grid, &sampled).unwrap().unwrap();
        assert!(point[0] > 5.0, "acquired {point:?} (index {idx})");

        // With one unsampled point left, that point is returned regardless.
        let mut nearly_full = vec![true; grid.len()];
        nearly_full[3] = false;
        let (idx, _) = acquire_next(&model, &grid, &nearly_full).unwrap().unwrap();
        assert_eq!(idx, 3);

        let full = vec![true; grid.len()];
        assert!(acquire_next(&model, &grid, &full).unwrap().is_none());
    }

    #[test]
    fn first_acquisition_after_corners_lands_centrally() {
        // Fit on the 4 corners of the single-room grid; the most uncertain
        // point sits away from every border.
        let grid = single_room_grid();
        let corners = corner_design(&grid);
        let y: Vec<f64> = corners.iter().map(|p| 5.0 + p[0] - 0.3 * p[1]).collect();
        let model =
            GpModel::fit(&corners, &y, &LengthscalePolicy::Fixed(1.0), DEFAULT_JITTER).unwrap();
        let sampled = vec![false; grid.len()];
        let (_, point) = acquire_next(&model, &grid, &sampled).unwrap().unwrap();
        assert!(point[0] > 0.5 && point[0] < 2.5, "central T_ref, got {point:?}");
        assert!(point[1] > 3.0 && point[1] < 12.0, "central T_ext, got {point:?}");
    }

    #[test]
    fn vacuous_threshold_stops_after_the_initial_design() {
        let grid = single_room_grid();
        let config = LearnerConfig {
            std_threshold: 1.0,
            ..LearnerConfig::default()
        };
        let calls = RefCell::new(0usize);
        let table = build_surrogate(&grid, &config, |p| {
            *calls.borrow_mut() += 1;
            Ok(p[0] + p[1])
        })
        .unwrap();
        assert_eq!(*calls.borrow(), 4);
        assert_eq!(table.iteration_count, 0);
        assert_eq!(table.simulation_count, 4);
        assert!(table.converged);
        assert_eq!(table.predicted.len(), grid.len());
    }

    #[test]
    fn one_dim_resistor_build_converges_cheaply_and_accurately() {
        let params = poc_resistor();
        let grid = InputGrid::new(vec![InputGrid::linspace_dim(10.0, 10_000.0, 1_000)]).unwrap();
        let config = LearnerConfig {
            std_threshold: 0.01,
            init: InitStrategy::Random { k: 4, seed: 42 },
            lengthscale: LengthscalePolicy::Fixed(0.3),
            ..LearnerConfig::default()
        };
        let table = build_surrogate(&grid, &config, |p| {
            Ok(resistor_equilibrium(&params, p[0], 293.15)
                .map_err(Box::new)?
                .current_a)
        })
        .unwrap();
        assert!(table.converged);
        assert!(
            table.simulation_count < 100,
            "expected far fewer simulations than the 1,000-point grid, got {}",
            table.simulation_count
        );
        let mut max_err = 0.0f64;
        for (i, &pred) in table.predicted.iter().enumerate() {
            let truth = resistor_equilibrium(&params, grid.point(i)[0], 293.15)
                .unwrap()
                .current_a;
            max_err = max_err.max((pred - truth).abs() / truth.abs().max(1e-9));
        }
        assert!(max_err <= 0.02, "max relative error {max_err}");
    }

    #[test]
    fn accounting_and_no_resampling_hold() {
        let grid = single_room_grid();
        let config = LearnerConfig {
            std_threshold: 0.05,
            ..LearnerConfig::default()
        };
        let seen = RefCell::new(HashSet::<Vec<u64>>::new());
        let table = build_surrogate(&grid, &config, |p| {
            let key: Vec<u64> = p.iter().map(|v| v.to_bits()).collect();
            assert!(seen.borrow_mut().insert(key), "point {p:?} simulated twice");
            Ok((p[0] * 0.7).sin() + 0.1 * p[1])
        })
        .unwrap();
        assert_eq!(table.simulation_count, seen.borrow().len());
        assert_eq!(table.simulation_count, 4 + table.iteration_count);
        assert_eq!(table.training_inputs.len(), table.simulation_count);
        assert!(table.converged);
        assert!(table.final_max_std < 0.05);
    }

    #[test]
    fn iteration_cap_flags_unconverged() {
        let grid = single_room_grid();
        let config = LearnerConfig {
            std_threshold: 0.001,
            max_iterations: Some(2),
            ..LearnerConfig::default()
        };
        let table = build_surrogate(&grid, &config, |p| Ok(p[0] * p[1])).unwrap();
        assert!(!table.converged);
        assert_eq!(table.iteration_count, 2);
        assert!(table.final_max_std >= 0.001);
    }

    #[test]
    fn tighter_thresholds_never_need_fewer_simulations() {
        let grid = InputGrid::new(vec![
            InputGrid::linspace_dim(0.0, 1.0, 12),
            InputGrid::linspace_dim(0.0, 1.0, 12),
        ])
        .unwrap();
        let mut last = usize::MAX;
        for threshold in [0.01, 0.05, 0.2, 1.0] {
            let config = LearnerConfig {
                std_threshold: threshold,
                ..LearnerConfig::default()
            };
            let table = build_surrogate(&grid, &config, |p| Ok((3.0 * p[0]).sin() * p[1])).unwrap();
            assert!(
                table.simulation_count <= last,
                "threshold {threshold} used {} sims, looser than previous {last}",
                table.simulation_count
            );
            last = table.simulation_count;
        }
    }

    #[test]
    fn simulator_failure_carries_progress() {
        let grid = single_room_grid();
        let config = LearnerConfig::default();
        let result = build_surrogate(&grid, &config, |p| {
            if p[0] > 2.0 {
                Err(format!("diverged at {p:?}").into())
            } else {
                Ok(p[0])
            }
        });
        match result {
            Err(LearnError::Simulator { completed, .. }) => assert!(completed < 4),
            other => panic!("expected simulator error, got {other:?}"),
        }
    }

    #[test]
    fn exhausting_the_grid_terminates() {
        // A tiny grid with an impossible threshold must stop by exhaustion.
        let grid = InputGrid::new(vec![vec![0.0, 1.0], vec![0.0, 1.0, 2.0]]).unwrap();
        let config = LearnerConfig {
            std_threshold: 1e-9,
            ..LearnerConfig::default()
        };
        let table = build_surrogate(&grid, &config, |p| Ok(p[0] + p[1])).unwrap();
        assert_eq!(table.simulation_count, grid.len());
        assert!(!table.converged || table.final_max_std < 1e-9);
    }

    #[test]
    fn comparison_runs_both_arms_deterministically() {
        let grid = InputGrid::new(vec![
            InputGrid::linspace_dim(0.0, 1.0, 8),
            InputGrid::linspace_dim(0.0, 1.0, 8),
        ])
        .unwrap();
        let config = LearnerConfig {
            std_threshold: 0.05,
            ..LearnerConfig::default()
        };
        let sim = |p: &[f64]| Ok(p[0] * 2.0 + (2.0 * p[1]).cos());
        let a = compare_init_strategies(&grid, &config, sim, &[1, 2, 3]).unwrap();
        let b = compare_init_strategies(&grid, &config, sim, &[1, 2, 3]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.corner.initial_design, 4);
        assert_eq!(a.random.len(), 3);
        assert!(a.random_median_iterations().is_finite());
        assert!(matches!(
            compare_init_strategies(&grid, &config, sim, &[]),
            Err(LearnError::InvalidConfig(_))
        ));
    }
}
