//! Hourly exploitation policy.
//!
//! Occupied hours pick the per-room setpoint deltas whose predicted
//! consumption lies closest to the PV energy available that hour, preferring
//! candidates inside a relative matching band and, among those, the action
//! that heats the coldest rooms hardest. Outside occupancy the policy is
//! rule-based: a night setback, a fixed morning preheat regardless of PV, and
//! a comfort floor whenever no PV is available.

use crate::learner::SurrogateTable;
use crate::{Classify, FailureKind};
use thiserror::Error;

/// The four admissible per-room reference variations, in grid order.
pub const DELTA_CHOICES: [i8; 4] = [-1, 0, 1, 2];
/// Guards the matching band against vanishing PV.
pub const PV_EPSILON_KWH: f64 = 0.1;

#[derive(Debug, Error)]
pub enum ControllerError {
    #[error("surrogate table is not converged; pass allow_unconverged to override")]
    UnconvergedTable,
    #[error("table grid does not match the delta encoding: {0}")]
    GridMismatch(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("input mismatch: {0}")]
    InputMismatch(String),
}

impl Classify for ControllerError {
    fn kind(&self) -> FailureKind {
        match self {
            ControllerError::UnconvergedTable => FailureKind::Numerical,
            _ => FailureKind::Input,
        }
    }
}

/// Current per-room reference temperatures [°C].
#[derive(Debug, Clone, PartialEq)]
pub struct SetpointState {
    pub references_c: Vec<f64>,
}

impl SetpointState {
    pub fn uniform(rooms: usize, reference_c: f64) -> Self {
        Self {
            references_c: vec![reference_c; rooms],
        }
    }
}

/// One admissible combination of per-room reference variations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionDelta {
    pub deltas: Vec<i8>,
}

/// Comfort and scheduling rules.
#[derive(Debug, Clone, PartialEq)]
pub struct ComfortPolicy {
    /// Minimum occupied-hours reference [°C].
    pub comfort_floor_c: f64,
    /// Maximum reference the controller may command [°C].
    pub comfort_ceiling_c: f64,
    /// Reference outside occupancy and preheat [°C].
    pub night_setpoint_c: f64,
    /// Hour of day when the morning preheat starts.
    pub preheat_hour: u32,
    /// First occupied hour of day.
    pub occupancy_start: u32,
    /// First hour of day after occupancy.
    pub occupancy_end: u32,
    /// Added to the comfort floor during preheat [°C].
    pub preheat_boost_c: f64,
    /// Relative half-width of the PV matching band.
    pub pv_match_band: f64,
    /// Canonical reference the surrogate's delta encoding is anchored to [°C].
    pub surrogate_base_c: f64,
}

impl Default for ComfortPolicy {
    fn default() -> Self {
        Self {
            comfort_floor_c: 19.0,
            comfort_ceiling_c: 24.0,
            night_setpoint_c: 10.0,
            preheat_hour: 6,
            occupancy_start: 8,
            occupancy_end: 18,
            preheat_boost_c: 2.0,
            pv_match_band: 0.10,
            surrogate_base_c: 20.0,
        }
    }
}

impl ComfortPolicy {
    pub fn validate(&self) -> Result<(), ControllerError> {
        if !(self.night_setpoint_c <= self.comfort_floor_c
            && self.comfort_floor_c <= self.comfort_ceiling_c)
        {
            return Err(ControllerError::InvalidPolicy(format!(
                "need night <= floor <= ceiling, got {} / {} / {}",
                self.night_setpoint_c, self.comfort_floor_c, self.comfort_ceiling_c
            )));
        }
        if !(self.preheat_hour < self.occupancy_start) {
            return Err(ControllerError::InvalidPolicy(format!(
                "preheat hour {} must precede occupancy start {}",
                self.preheat_hour, self.occupancy_start
            )));
        }
        if self.occupancy_start >= self.occupancy_end || self.occupancy_end > 24 {
            return Err(ControllerError::InvalidPolicy(format!(
                "bad occupancy window {}..{}",
                self.occupancy_start, self.occupancy_end
            )));
        }
        if !(self.pv_match_band > 0.0) {
            return Err(ControllerError::InvalidPolicy(
                "pv_match_band must be > 0".into(),
            ));
        }
        Ok(())
    }

    /// Preheat reference, never above the ceiling.
    pub fn preheat_setpoint_c(&self) -> f64 {
        (self.comfort_floor_c + self.preheat_boost_c).min(self.comfort_ceiling_c)
    }
}

/// Which rule produced an hour's setpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionMode {
    Night,
    Preheat,
    TrackPv,
    NoPvFloor,
}

impl DecisionMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecisionMode::Night => "night",
            DecisionMode::Preheat => "preheat",
            DecisionMode::TrackPv => "track-pv",
            DecisionMode::NoPvFloor => "no-pv-floor",
        }
    }
}

/// The controller's output for one hour.
#[derive(Debug, Clone, PartialEq)]
pub struct HourDecision {
    /// The chosen delta combination; `None` for rule-based modes whose
    /// setpoints are not produced by a delta action.
    pub action: Option<ActionDelta>,
    /// Per-room references to command this hour [°C].
    pub setpoints_c: Vec<f64>,
    /// Surrogate-predicted consumption of the chosen action [kWh], when a
    /// table drove the decision.
    pub predicted_kwh: Option<f64>,
    /// PV energy available this hour [kWh].
    pub pv_available_kwh: f64,
    pub mode: DecisionMode,
}

/// Every delta combination with its clamped resulting setpoints.
///
/// Combinations whose clamped setpoints coincide are deduplicated, keeping
/// the lexicographically smallest delta vector (the enumeration order makes
/// that the first occurrence).
pub fn feasible_actions(
    state: &SetpointState,
    policy: &ComfortPolicy,
) -> Vec<(ActionDelta, Vec<f64>)> {
    let rooms = state.references_c.len();
    let total = DELTA_CHOICES.len().pow(rooms as u32);
    let mut seen: Vec<Vec<f64>> = Vec::new();
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        let mut deltas = vec![0i8; rooms];
        let mut rest = code;
        for room in (0..rooms).rev() {
            deltas[room] = DELTA_CHOICES[rest % DELTA_CHOICES.len()];
            rest /= DELTA_CHOICES.len();
        }
        let setpoints: Vec<f64> = state
            .references_c
            .iter()
            .zip(&deltas)
            .map(|(&r, &d)| (r + f64::from(d)).clamp(policy.comfort_floor_c, policy.comfort_ceiling_c))
            .collect();
        if seen.iter().any(|s| s == &setpoints) {
            continue;
        }
        seen.push(setpoints.clone());
        out.push((ActionDelta { deltas }, setpoints));
    }
    out
}

/// Looks up the table prediction for a delta vector.
fn predicted_consumption(
    table: &SurrogateTable,
    deltas: &[i8],
) -> Result<f64, ControllerError> {
    let indices: Result<Vec<usize>, _> = deltas
        .iter()
        .map(|&d| {
            DELTA_CHOICES
                .iter()
                .position(|&c| c == d)
                .ok_or_else(|| ControllerError::GridMismatch(format!("delta {d} not encodable")))
        })
        .collect();
    Ok(table.lookup(&indices?))
}

fn check_table(table: &SurrogateTable, rooms: usize) -> Result<(), ControllerError> {
    if table.grid.dims() != rooms {
        return Err(ControllerError::GridMismatch(format!(
            "table has {} dims for {} rooms",
            table.grid.dims(),
            rooms
        )));
    }
    for dim in 0..rooms {
        let values = table.grid.dim_values(dim);
        let expected: Vec<f64> = DELTA_CHOICES.iter().map(|&d| f64::from(d)).collect();
        if values != expected.as_slice() {
            return Err(ControllerError::GridMismatch(format!(
                "dimension {dim} is {values:?}, expected {expected:?}"
            )));
        }
    }
    Ok(())
}

/// Room order sorted by ascending temperature, room index breaking ties.
fn coldest_first_order(room_temps_c: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..room_temps_c.len()).collect();
    order.sort_by(|&a, &b| room_temps_c[a].total_cmp(&room_temps_c[b]).then(a.cmp(&b)));
    order
}

/// `true` when `a` beats `b` under the declared candidate order: compare the
/// delta vectors reordered coldest-room-first, lexicographically descending
/// (larger delta for a colder room wins); full ties fall back to lower
/// predicted consumption.
fn candidate_beats(
    a: (&ActionDelta, f64),
    b: (&ActionDelta, f64),
    order: &[usize],
) -> bool {
    for &room in order {
        match a.0.deltas[room].cmp(&b.0.deltas[room]) {
            std::cmp::Ordering::Greater => return true,
            std::cmp::Ordering::Less => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    a.1 < b.1
}

/// Chooses the hour's action for an occupied hour.
///
/// Candidates are the feasible actions whose predicted consumption `C`
/// satisfies `|C − pv| <= band · max(pv, ε)`. An empty band falls back to the
/// single action minimizing `|C − pv|`. Zero PV bypasses the table entirely
/// and commands the comfort floor.
pub fn select_action(
    table: &SurrogateTable,
    pv_available_kwh: f64,
    room_temps_c: &[f64],
    state: &SetpointState,
    policy: &ComfortPolicy,
    allow_unconverged: bool,
) -> Result<HourDecision, ControllerError> {
    policy.validate()?;
    let rooms = state.references_c.len();
    if room_temps_c.len() != rooms {
        return Err(ControllerError::InputMismatch(format!(
            "{} room temps for {} references",
            room_temps_c.len(),
            rooms
        )));
    }

    if pv_available_kwh <= 0.0 {
        return Ok(HourDecision {
            action: None,
            setpoints_c: vec![policy.comfort_floor_c; rooms],
            predicted_kwh: None,
            pv_available_kwh,
            mode: DecisionMode::NoPvFloor,
        });
    }

    if !table.converged && !allow_unconverged {
        return Err(ControllerError::UnconvergedTable);
    }
    check_table(table, rooms)?;

    let actions = feasible_actions(state, policy);
    let scored: Vec<(ActionDelta, Vec<f64>, f64)> = actions
        .into_iter()
        .map(|(action, setpoints)| {
            let c = predicted_consumption(table, &action.deltas)?;
            Ok((action, setpoints, c))
        })
        .collect::<Result<_, ControllerError>>()?;

    let band = policy.pv_match_band * pv_available_kwh.max(PV_EPSILON_KWH);
    let order = coldest_first_order(room_temps_c);

    let in_band: Vec<&(ActionDelta, Vec<f64>, f64)> = scored
        .iter()
        .filter(|(_, _, c)| (c - pv_available_kwh).abs() <= band)
        .collect();

    let chosen = if in_band.is_empty() {
        // Argmin fallback; the declared candidate order breaks exact ties.
        scored
            .iter()
            .reduce(|best, cand| {
                let best_gap = (best.2 - pv_available_kwh).abs();
                let cand_gap = (cand.2 - pv_available_kwh).abs();
                if cand_gap < best_gap
                    || (cand_gap == best_gap
                        && candidate_beats((&cand.0, cand.2), (&best.0, best.2), &order))
                {
                    cand
                } else {
                    best
                }
            })
            .expect("feasible action set is never empty")
    } else {
        in_band
            .iter()
            .copied()
            .reduce(|best, cand| {
                if candidate_beats((&cand.0, cand.2), (&best.0, best.2), &order) {
                    cand
                } else {
                    best
                }
            })
            .expect("non-empty band")
    };

    Ok(HourDecision {
        action: Some(chosen.0.clone()),
        setpoints_c: chosen.1.clone(),
        predicted_kwh: Some(chosen.2),
        pv_available_kwh,
        mode: DecisionMode::TrackPv,
    })
}

/// Dispatches one hour of the day to the night, preheat or occupied rule.
pub fn schedule_hour(
    hour_of_day: u32,
    pv_available_kwh: f64,
    room_temps_c: &[f64],
    state: &SetpointState,
    table: &SurrogateTable,
    policy: &ComfortPolicy,
    allow_unconverged: bool,
) -> Result<HourDecision, ControllerError> {
    policy.validate()?;
    if hour_of_day >= 24 {
        return Err(ControllerError::InputMismatch(format!(
            "hour of day {hour_of_day} out of range"
        )));
    }
    let rooms = state.references_c.len();

    if hour_of_day < policy.preheat_hour || hour_of_day >= policy.occupancy_end {
        return Ok(HourDecision {
            action: None,
            setpoints_c: vec![policy.night_setpoint_c; rooms],
            predicted_kwh: None,
            pv_available_kwh,
            mode: DecisionMode::Night,
        });
    }
    if hour_of_day < policy.occupancy_start {
        return Ok(HourDecision {
            action: None,
            setpoints_c: vec![policy.preheat_setpoint_c(); rooms],
            predicted_kwh: None,
            pv_available_kwh,
            mode: DecisionMode::Preheat,
        });
    }
    select_action(
        table,
        pv_available_kwh,
        room_temps_c,
        state,
        policy,
        allow_unconverged,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::{InputGrid, LearnerConfig, SurrogateTable};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Builds a delta-encoded table directly from a consumption function.
    fn table_from_fn(rooms: usize, f: impl Fn(&[f64]) -> f64) -> SurrogateTable {
        let dims = vec![vec![-1.0, 0.0, 1.0, 2.0]; rooms];
        let grid = InputGrid::new(dims).unwrap();
        let predicted: Vec<f64> = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        SurrogateTable {
            predicted,
            final_max_std: 0.0,
            training_inputs: vec![],
            training_outputs: vec![],
            iteration_count: 0,
            simulation_count: 0,
            converged: true,
            config: LearnerConfig::default(),
            grid,
        }
    }

    /// Independent implementation of the declared filter + sort.
    fn brute_force(
        table: &SurrogateTable,
        pv: f64,
        temps: &[f64],
        state: &SetpointState,
        policy: &ComfortPolicy,
    ) -> (Vec<i8>, f64) {
        // Enumerate all delta combinations with plain nested loops.
        let rooms = state.references_c.len();
        let mut all: Vec<(Vec<i8>, Vec<f64>)> = vec![(vec![], vec![])];
        for room in 0..rooms {
            let mut next = Vec::new();
            for (deltas, sps) in &all {
                for &d in &DELTA_CHOICES {
                    let mut deltas = deltas.clone();
                    let mut sps = sps.clone();
                    deltas.push(d);
                    sps.push(
                        (state.references_c[room] + f64::from(d))
                            .clamp(policy.comfort_floor_c, policy.comfort_ceiling_c),
                    );
                    next.push((deltas, sps));
                }
            }
            all = next;
        }
        // Dedup by resulting setpoints, first (lexicographically smallest
        // delta) representative wins.
        let mut dedup: Vec<(Vec<i8>, Vec<f64>)> = Vec::new();
        for (deltas, sps) in all {
            if !dedup.iter().any(|(_, s)| s == &sps) {
                dedup.push((deltas, sps));
            }
        }
        // Score.
        let scored: Vec<(Vec<i8>, Vec<f64>, f64)> = dedup
            .into_iter()
            .map(|(deltas, sps)| {
                let idx: Vec<usize> = deltas
                    .iter()
                    .map(|d| DELTA_CHOICES.iter().position(|c| c == d).unwrap())
                    .collect();
                let c = table.lookup(&idx);
                (deltas, sps, c)
            })
            .collect();
        let band = policy.pv_match_band * pv.max(PV_EPSILON_KWH);
        let mut candidates: Vec<&(Vec<i8>, Vec<f64>, f64)> = scored
            .iter()
            .filter(|(_, _, c)| (c - pv).abs() <= band)
            .collect();
        if candidates.is_empty() {
            let min_gap = scored
                .iter()
                .map(|(_, _, c)| (c - pv).abs())
                .fold(f64::INFINITY, f64::min);
            candidates = scored
                .iter()
                .filter(|(_, _, c)| (c - pv).abs() == min_gap)
                .collect();
        }
        // Full sort under the declared order, then take the head.
        let mut order: Vec<usize> = (0..rooms).collect();
        order.sort_by(|&a, &b| temps[a].total_cmp(&temps[b]).then(a.cmp(&b)));
        candidates.sort_by(|x, y| {
            for &room in &order {
                match y.0[room].cmp(&x.0[room]) {
                    std::cmp::Ordering::Equal => {}
                    other => return other,
                }
            }
            x.2.total_cmp(&y.2)
        });
        let best = candidates[0];
        (best.0.clone(), best.2)
    }

    #[test]
    fn feasible_action_counts() {
        let policy = ComfortPolicy::default();
        // Interior state: no clamping, all 4^6 distinct.
        let state = SetpointState::uniform(6, 21.0);
        assert_eq!(feasible_actions(&state, &policy).len(), 4096);

        // Every room at the ceiling: {0,+1,+2} all clamp to the ceiling,
        // leaving two distinct setpoints per room.
        let state = SetpointState::uniform(6, policy.comfort_ceiling_c);
        assert_eq!(feasible_actions(&state, &policy).len(), 64);

        // One room at the floor: −1 clamps onto 0's result.
        let state = SetpointState::uniform(1, policy.comfort_floor_c);
        let actions = feasible_actions(&state, &policy);
        let setpoints: Vec<Vec<f64>> = actions.iter().map(|(_, s)| s.clone()).collect();
        assert_eq!(
            setpoints,
            vec![
                vec![policy.comfort_floor_c],
                vec![policy.comfort_floor_c + 1.0],
                vec![policy.comfort_floor_c + 2.0]
            ]
        );
        // The representative of the clamped pair is the smaller delta.
        assert_eq!(actions[0].0.deltas, vec![-1]);
    }

    #[test]
    fn zero_pv_commands_the_floor() {
        let policy = ComfortPolicy::default();
        let table = table_from_fn(2, |d| 2.0 + d.iter().sum::<f64>());
        let state = SetpointState::uniform(2, 21.0);
        let decision =
            select_action(&table, 0.0, &[20.0, 19.0], &state, &policy, false).unwrap();
        assert_eq!(decision.mode, DecisionMode::NoPvFloor);
        assert_eq!(decision.setpoints_c, vec![19.0, 19.0]);
        assert!(decision.action.is_none());
    }

    #[test]
    fn coldest_room_gets_the_larger_delta() {
        let policy = ComfortPolicy::default();
        // Consumption depends only on the sum of deltas, so many candidates
        // tie inside the band and the coldest-first order decides.
        let table = table_from_fn(3, |d| 5.0 + d.iter().sum::<f64>() * 0.01);
        let state = SetpointState::uniform(3, 21.0);
        // Room 2 is coldest.
        let decision =
            select_action(&table, 5.0, &[21.0, 20.5, 18.0], &state, &policy, false).unwrap();
        let action = decision.action.unwrap();
        assert_eq!(action.deltas[2], 2, "coldest room takes the max delta");
    }

    #[test]
    fn matches_brute_force_on_two_room_toy() {
        let policy = ComfortPolicy::default();
        let table = table_from_fn(2, |d| 3.0 + 0.8 * d[0] + 0.5 * d[1]);
        let state = SetpointState {
            references_c: vec![20.0, 22.0],
        };
        let temps = [19.5, 21.0];
        for pv in [0.5, 2.0, 3.0, 4.5, 9.0] {
            let got = select_action(&table, pv, &temps, &state, &policy, false).unwrap();
            let (want_deltas, want_c) = brute_force(&table, pv, &temps, &state, &policy);
            assert_eq!(got.action.unwrap().deltas, want_deltas, "pv = {pv}");
            assert_eq!(got.predicted_kwh.unwrap(), want_c);
        }
    }

    #[test]
    fn brute_force_equivalence_on_random_instances() {
        let policy = ComfortPolicy::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for case in 0..100 {
            let rooms = rng.gen_range(1..=4usize);
            let weights: Vec<f64> = (0..rooms).map(|_| rng.gen_range(0.1..1.5)).collect();
            let noise_seed: u64 = rng.gen();
            let table = table_from_fn(rooms, |d| {
                let mut h = noise_seed;
                for &v in d {
                    h = h.wrapping_mul(0x100000001b3).wrapping_add(v.to_bits());
                }
                let jitter = (h % 1000) as f64 / 5000.0;
                2.0 + d.iter().zip(&weights).map(|(v, w)| v * w).sum::<f64>() + jitter
            });
            let state = SetpointState {
                references_c: (0..rooms).map(|_| rng.gen_range(19.0..24.0)).collect(),
            };
            let temps: Vec<f64> = (0..rooms).map(|_| rng.gen_range(15.0..24.0)).collect();
            let pv = rng.gen_range(0.1..8.0);

            let got = select_action(&table, pv, &temps, &state, &policy, false).unwrap();
            let (want_deltas, want_c) = brute_force(&table, pv, &temps, &state, &policy);
            assert_eq!(
                got.action.unwrap().deltas,
                want_deltas,
                "case {case}: rooms {rooms} pv {pv}"
            );
            assert_eq!(got.predicted_kwh.unwrap(), want_c);
        }
    }

    #[test]
    fn fallback_is_exact_argmin() {
        let policy = ComfortPolicy::default();
        let table = table_from_fn(2, |d| 30.0 + d.iter().sum::<f64>());
        let state = SetpointState::uniform(2, 21.0);
        // PV far below every prediction: band is empty, argmin picks the
        // minimum-consumption action.
        let decision = select_action(&table, 1.0, &[20.0, 20.0], &state, &policy, false).unwrap();
        assert_eq!(decision.action.unwrap().deltas, vec![-1, -1]);
        assert_eq!(decision.mode, DecisionMode::TrackPv);
    }

    #[test]
    fn decision_is_equivariant_under_room_permutation() {
        let policy = ComfortPolicy::default();
        let weights = [0.9, 0.4, 1.3];
        let table = table_from_fn(3, |d| 4.0 + d.iter().zip(&weights).map(|(v, w)| v * w).sum::<f64>());
        let state = SetpointState {
            references_c: vec![20.0, 21.0, 22.0],
        };
        let temps = [19.0, 20.5, 17.5];
        let base = select_action(&table, 4.0, &temps, &state, &policy, false).unwrap();

        // Swap rooms 0 and 2 everywhere.
        let perm = [2usize, 1, 0];
        let table_p = table_from_fn(3, |d| {
            let unpermuted: Vec<f64> = perm.iter().map(|&p| d[p]).collect();
            4.0 + unpermuted
                .iter()
                .zip(&weights)
                .map(|(v, w)| v * w)
                .sum::<f64>()
        });
        let state_p = SetpointState {
            references_c: perm.iter().map(|&p| state.references_c[p]).collect(),
        };
        let temps_p: Vec<f64> = perm.iter().map(|&p| temps[p]).collect();
        let permuted = select_action(&table_p, 4.0, &temps_p, &state_p, &policy, false).unwrap();

        let base_deltas = base.action.unwrap().deltas;
        let permuted_deltas = permuted.action.unwrap().deltas;
        for (i, &p) in perm.iter().enumerate() {
            assert_eq!(permuted_deltas[i], base_deltas[p]);
        }
    }

    #[test]
    fn unconverged_table_is_refused_unless_overridden() {
        let policy = ComfortPolicy::default();
        let mut table = table_from_fn(1, |d| 2.0 + d[0]);
        table.converged = false;
        let state = SetpointState::uniform(1, 21.0);
        assert!(matches!(
            select_action(&table, 2.0, &[20.0], &state, &policy, false),
            Err(ControllerError::UnconvergedTable)
        ));
        assert!(select_action(&table, 2.0, &[20.0], &state, &policy, true).is_ok());
    }

    #[test]
    fn schedule_dispatches_by_hour() {
        let policy = ComfortPolicy::default();
        let table = table_from_fn(2, |d| 3.0 + d.iter().sum::<f64>());
        let state = SetpointState::uniform(2, 21.0);
        let temps = [20.0, 20.0];

        let night = schedule_hour(3, 5.0, &temps, &state, &table, &policy, false).unwrap();
        assert_eq!(night.mode, DecisionMode::Night);
        assert_eq!(night.setpoints_c, vec![policy.night_setpoint_c; 2]);

        // Preheat raises the reference even with zero PV.
        let preheat = schedule_hour(6, 0.0, &temps, &state, &table, &policy, false).unwrap();
        assert_eq!(preheat.mode, DecisionMode::Preheat);
        assert_eq!(preheat.setpoints_c, vec![policy.preheat_setpoint_c(); 2]);

        let tracked = schedule_hour(12, 3.0, &temps, &state, &table, &policy, false).unwrap();
        assert_eq!(tracked.mode, DecisionMode::TrackPv);
        let c = tracked.predicted_kwh.unwrap();
        assert!((c - 3.0).abs() <= policy.pv_match_band * 3.0);

        let evening = schedule_hour(18, 1.0, &temps, &state, &table, &policy, false).unwrap();
        assert_eq!(evening.mode, DecisionMode::Night);
    }

    #[test]
    fn emitted_setpoints_respect_bounds() {
        let policy = ComfortPolicy::default();
        let table = table_from_fn(2, |d| 3.0 + d.iter().sum::<f64>());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let hour = rng.gen_range(0..24u32);
            let pv = rng.gen_range(0.0..6.0);
            let state = SetpointState {
                references_c: (0..2).map(|_| rng.gen_range(19.0..24.0)).collect(),
            };
            let temps: Vec<f64> = (0..2).map(|_| rng.gen_range(10.0..24.0)).collect();
            let decision =
                schedule_hour(hour, pv, &temps, &state, &table, &policy, false).unwrap();
            for &sp in &decision.setpoints_c {
                assert!(sp >= policy.night_setpoint_c && sp <= policy.comfort_ceiling_c);
                if decision.mode == DecisionMode::TrackPv || decision.mode == DecisionMode::NoPvFloor
                {
                    assert!(sp >= policy.comfort_floor_c);
                }
            }
        }
    }
}
