//! Committee of surrogate models keyed on external-temperature buckets.
//!
//! Rather than one monolithic surrogate over every input including the
//! external temperature, the committee holds one 6-input table per 0.5 °C
//! temperature bucket and builds members lazily the first time an hour lands
//! in their bucket. Buckets are stored as integer half-degrees so the keys
//! are exact. Cumulative counters and a creation log make the demand-driven
//! growth of the committee plottable.

use crate::learner::{
    build_surrogate, read_table, write_table, InputGrid, LearnError, LearnerConfig, SimFailure,
    SurrogateTable, TableIoError,
};
use crate::{Classify, FailureKind};
use chrono::NaiveDateTime;
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CommitteeError {
    #[error("invalid temperature: {0}")]
    InvalidTemp(String),
    #[error(transparent)]
    Learner(#[from] LearnError),
    #[error(transparent)]
    TableIo(#[from] TableIoError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest error at {path}:{line}: {message}")]
    Manifest {
        path: String,
        line: usize,
        message: String,
    },
}

impl Classify for CommitteeError {
    fn kind(&self) -> FailureKind {
        match self {
            CommitteeError::InvalidTemp(_) | CommitteeError::Manifest { .. } => FailureKind::Input,
            CommitteeError::Learner(e) => e.kind(),
            CommitteeError::TableIo(e) => e.kind(),
            CommitteeError::Io { .. } => FailureKind::Io,
        }
    }
}

/// An external-temperature bucket, stored exactly as integer half-degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TempBucket {
    half_degrees: i32,
}

impl TempBucket {
    pub fn from_half_degrees(half_degrees: i32) -> Self {
        Self { half_degrees }
    }

    pub fn half_degrees(&self) -> i32 {
        self.half_degrees
    }

    /// Bucket centre in °C (always a multiple of 0.5).
    pub fn value_c(&self) -> f64 {
        f64::from(self.half_degrees) / 2.0
    }
}

impl std::fmt::Display for TempBucket {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.1}", self.value_c())
    }
}

/// Rounds a raw temperature to its nearest half-degree bucket; exact
/// quarter-degree midpoints round toward +∞.
pub fn bucket_of(raw_temp_c: f64) -> Result<TempBucket, CommitteeError> {
    if !raw_temp_c.is_finite() {
        return Err(CommitteeError::InvalidTemp(format!(
            "temperature must be finite, got {raw_temp_c}"
        )));
    }
    let half = (2.0 * raw_temp_c + 0.5).floor();
    if half.abs() > f64::from(i32::MAX / 2) {
        return Err(CommitteeError::InvalidTemp(format!(
            "temperature {raw_temp_c} out of bucket range"
        )));
    }
    Ok(TempBucket {
        half_degrees: half as i32,
    })
}

/// One member creation, for the cumulative-growth plots.
#[derive(Debug, Clone, PartialEq)]
pub struct CreationEvent {
    pub at: NaiveDateTime,
    pub bucket: TempBucket,
    pub simulations: usize,
}

/// Snapshot of the committee's cumulative statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct CommitteeStats {
    pub models_created: usize,
    pub total_simulations: usize,
    pub creation_log: Vec<CreationEvent>,
}

/// Map from temperature bucket to surrogate table, built lazily on demand.
#[derive(Debug, Clone)]
pub struct Committee {
    members: BTreeMap<TempBucket, SurrogateTable>,
    setpoint_grid: InputGrid,
    config: LearnerConfig,
    models_created: usize,
    total_simulations: usize,
    creation_log: Vec<CreationEvent>,
    archived_logs: Vec<Vec<CreationEvent>>,
}

impl Committee {
    pub fn new(setpoint_grid: InputGrid, config: LearnerConfig) -> Self {
        Self {
            members: BTreeMap::new(),
            setpoint_grid,
            config,
            models_created: 0,
            total_simulations: 0,
            creation_log: Vec::new(),
            archived_logs: Vec::new(),
        }
    }

    /// The per-room delta grid shared by every member.
    pub fn grid(&self) -> &InputGrid {
        &self.setpoint_grid
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, bucket: TempBucket) -> bool {
        self.members.contains_key(&bucket)
    }

    pub fn member(&self, bucket: TempBucket) -> Option<&SurrogateTable> {
        self.members.get(&bucket)
    }

    pub fn buckets(&self) -> impl Iterator<Item = TempBucket> + '_ {
        self.members.keys().copied()
    }

    /// Returns the member for `raw_temp_c`, training it on first demand.
    ///
    /// `simulate(bucket_temp_c, grid_point)` is the ground-truth consumption
    /// for one grid point with the bucket temperature bound as the external
    /// condition; it only runs when the bucket is absent. On training failure
    /// the bucket is left absent and the error surfaces.
    pub fn get_or_train<F>(
        &mut self,
        raw_temp_c: f64,
        at: NaiveDateTime,
        mut simulate: F,
    ) -> Result<(&SurrogateTable, bool), CommitteeError>
    where
        F: FnMut(f64, &[f64]) -> Result<f64, SimFailure>,
    {
        let bucket = bucket_of(raw_temp_c)?;
        if self.members.contains_key(&bucket) {
            return Ok((&self.members[&bucket], false));
        }
        let bucket_temp = bucket.value_c();
        let table = build_surrogate(&self.setpoint_grid, &self.config, |point| {
            simulate(bucket_temp, point)
        })?;
        self.models_created += 1;
        self.total_simulations += table.simulation_count;
        self.creation_log.push(CreationEvent {
            at,
            bucket,
            simulations: table.simulation_count,
        });
        let entry = self.members.entry(bucket).or_insert(table);
        debug_assert_eq!(
            self.total_simulations,
            self.creation_log.iter().map(|e| e.simulations).sum::<usize>()
        );
        Ok((entry, true))
    }

    /// Snapshot of the cumulative counters and the creation log.
    pub fn stats(&self) -> CommitteeStats {
        CommitteeStats {
            models_created: self.models_created,
            total_simulations: self.total_simulations,
            creation_log: self.creation_log.clone(),
        }
    }

    /// Sum of the members' simulation counts; must equal the running total.
    pub fn member_simulation_sum(&self) -> usize {
        self.members.values().map(|t| t.simulation_count).sum()
    }

    /// Erases every member and resets the counters; the creation log is
    /// archived, not lost.
    pub fn invalidate(&mut self) {
        self.members.clear();
        self.models_created = 0;
        self.total_simulations = 0;
        let log = std::mem::take(&mut self.creation_log);
        if !log.is_empty() {
            self.archived_logs.push(log);
        }
    }

    pub fn archived_logs(&self) -> &[Vec<CreationEvent>] {
        &self.archived_logs
    }

    fn member_file_name(bucket: TempBucket) -> String {
        format!("bucket_{}.table", bucket.half_degrees())
    }

    /// Persists every member plus a human-readable manifest into `dir`.
    pub fn save(&self, dir: &Path) -> Result<(), CommitteeError> {
        std::fs::create_dir_all(dir).map_err(|source| CommitteeError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        let mut manifest = String::new();
        manifest.push_str("pvdr-committee v1\n");
        manifest.push_str(&format!("models_created = {}\n", self.models_created));
        manifest.push_str(&format!("total_simulations = {}\n", self.total_simulations));
        for (bucket, table) in &self.members {
            let file = Self::member_file_name(*bucket);
            write_table(table, &dir.join(&file))?;
            manifest.push_str(&format!("member = {} {}\n", bucket.half_degrees(), file));
        }
        for event in &self.creation_log {
            manifest.push_str(&format!(
                "created = {} {} {}\n",
                event.at.format("%Y-%m-%dT%H:%M:%S"),
                event.bucket.half_degrees(),
                event.simulations
            ));
        }
        let path = dir.join("manifest.txt");
        std::fs::write(&path, manifest).map_err(|source| CommitteeError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Warm restart: reloads a committee previously written by [`Committee::save`].
    pub fn load(dir: &Path, config: LearnerConfig, grid: InputGrid) -> Result<Self, CommitteeError> {
        let manifest_path = dir.join("manifest.txt");
        let text = std::fs::read_to_string(&manifest_path).map_err(|source| CommitteeError::Io {
            path: manifest_path.display().to_string(),
            source,
        })?;
        let path_label = manifest_path.display().to_string();
        let err = |line: usize, message: String| CommitteeError::Manifest {
            path: path_label.clone(),
            line,
            message,
        };

        let mut committee = Self::new(grid, config);
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if i == 0 {
                if line.trim() != "pvdr-committee v1" {
                    return Err(err(line_no, format!("bad header `{line}`")));
                }
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(line_no, format!("expected key = value, got `{line}`")));
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "models_created" => {
                    committee.models_created = value
                        .parse()
                        .map_err(|_| err(line_no, "bad models_created".into()))?;
                }
                "total_simulations" => {
                    committee.total_simulations = value
                        .parse()
                        .map_err(|_| err(line_no, "bad total_simulations".into()))?;
                }
                "member" => {
                    let mut parts = value.split_whitespace();
                    let (Some(half), Some(file), None) =
                        (parts.next(), parts.next(), parts.next())
                    else {
                        return Err(err(line_no, format!("bad member line `{value}`")));
                    };
                    let half: i32 = half
                        .parse()
                        .map_err(|_| err(line_no, "bad bucket half-degrees".into()))?;
                    let table = read_table(&dir.join(file))?;
                    committee
                        .members
                        .insert(TempBucket::from_half_degrees(half), table);
                }
                "created" => {
                    let mut parts = value.split_whitespace();
                    let (Some(at), Some(half), Some(sims), None) =
                        (parts.next(), parts.next(), parts.next(), parts.next())
                    else {
                        return Err(err(line_no, format!("bad created line `{value}`")));
                    };
                    let at = NaiveDateTime::parse_from_str(at, "%Y-%m-%dT%H:%M:%S")
                        .map_err(|_| err(line_no, format!("bad timestamp `{at}`")))?;
                    committee.creation_log.push(CreationEvent {
                        at,
                        bucket: TempBucket::from_half_degrees(
                            half.parse()
                                .map_err(|_| err(line_no, "bad bucket".into()))?,
                        ),
                        simulations: sims
                            .parse()
                            .map_err(|_| err(line_no, "bad simulations".into()))?,
                    });
                }
                other => return Err(err(line_no, format!("unknown key `{other}`"))),
            }
        }
        if committee.member_simulation_sum() != committee.total_simulations {
            return Err(err(
                0,
                format!(
                    "counter mismatch: members sum to {}, manifest claims {}",
                    committee.member_simulation_sum(),
                    committee.total_simulations
                ),
            ));
        }
        Ok(committee)
    }
}

/// The shared 6-room delta grid ({−1, 0, +1, +2} per room).
pub fn delta_grid(rooms: usize) -> InputGrid {
    InputGrid::new(vec![vec![-1.0, 0.0, 1.0, 2.0]; rooms]).expect("static delta grid is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::InitStrategy;
    use proptest::prelude::*;

    fn stamp(h: u32) -> NaiveDateTime {
        chrono::NaiveDate::from_ymd_opt(2024, 1, 15)
            .unwrap()
            .and_hms_opt(h, 0, 0)
            .unwrap()
    }

    fn loose_config() -> LearnerConfig {
        LearnerConfig {
            std_threshold: 1.0,
            init: InitStrategy::Corners,
            ..LearnerConfig::default()
        }
    }

    fn toy_sim(bucket_temp: f64, point: &[f64]) -> Result<f64, SimFailure> {
        Ok(10.0 - 0.3 * bucket_temp + point.iter().sum::<f64>())
    }

    #[test]
    fn bucket_rounding_examples() {
        assert_eq!(bucket_of(12.26).unwrap().value_c(), 12.5);
        assert_eq!(bucket_of(12.25).unwrap().value_c(), 12.5);
        assert_eq!(bucket_of(12.0).unwrap().value_c(), 12.0);
        assert_eq!(bucket_of(12.24).unwrap().value_c(), 12.0);
        assert_eq!(bucket_of(-12.25).unwrap().value_c(), -12.0);
        assert_eq!(bucket_of(-0.1).unwrap().value_c(), 0.0);
        assert!(bucket_of(f64::NAN).is_err());
        assert!(bucket_of(f64::INFINITY).is_err());
    }

    #[test]
    fn second_query_of_same_bucket_is_a_cache_hit() {
        let mut committee = Committee::new(delta_grid(6), loose_config());
        let mut calls = 0usize;
        let (_, created) = committee
            .get_or_train(11.3, stamp(0), |t, p| {
                calls += 1;
                toy_sim(t, p)
            })
            .unwrap();
        assert!(created);
        assert_eq!(calls, 64, "loose threshold trains on the 2^6 corners only");
        let stats = committee.stats();
        assert_eq!(stats.models_created, 1);
        assert_eq!(stats.total_simulations, 64);

        // 11.4 lands in the same 11.5 bucket: no new simulations.
        let (_, created) = committee
            .get_or_train(11.4, stamp(1), |t, p| {
                calls += 1;
                toy_sim(t, p)
            })
            .unwrap();
        assert!(!created);
        assert_eq!(calls, 64);
        assert_eq!(committee.stats(), stats);
    }

    #[test]
    fn counters_track_member_sums() {
        let mut committee = Committee::new(delta_grid(3), loose_config());
        for (hour, temp) in [(0u32, 5.0), (1, 9.7), (2, 5.1), (3, 14.2)] {
            committee.get_or_train(temp, stamp(hour), toy_sim).unwrap();
            assert_eq!(committee.stats().total_simulations, committee.member_simulation_sum());
        }
        assert_eq!(committee.len(), 3, "5.0 and 5.1 share a bucket");
        assert_eq!(committee.stats().total_simulations, 3 * 8);
    }

    #[test]
    fn empty_committee_stats() {
        let committee = Committee::new(delta_grid(2), loose_config());
        let stats = committee.stats();
        assert_eq!(stats.models_created, 0);
        assert_eq!(stats.total_simulations, 0);
        assert!(stats.creation_log.is_empty());
    }

    #[test]
    fn invalidate_archives_and_retrains() {
        let mut committee = Committee::new(delta_grid(2), loose_config());
        committee.get_or_train(8.0, stamp(0), toy_sim).unwrap();
        let pre_log = committee.stats().creation_log;

        committee.invalidate();
        assert!(committee.is_empty());
        assert_eq!(committee.stats().models_created, 0);
        assert_eq!(committee.archived_logs(), &[pre_log]);

        // Idempotent on an empty committee.
        committee.invalidate();
        assert_eq!(committee.archived_logs().len(), 1);

        let (_, created) = committee.get_or_train(8.0, stamp(5), toy_sim).unwrap();
        assert!(created, "retrains from scratch after invalidation");
    }

    #[test]
    fn training_failure_leaves_bucket_absent() {
        let mut committee = Committee::new(delta_grid(2), loose_config());
        let result = committee.get_or_train(7.0, stamp(0), |_, _| {
            Err("simulator exploded".to_string().into())
        });
        assert!(result.is_err());
        assert!(committee.is_empty());
        assert_eq!(committee.stats().total_simulations, 0);
    }

    #[test]
    fn save_and_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut committee = Committee::new(delta_grid(2), loose_config());
        committee.get_or_train(8.0, stamp(0), toy_sim).unwrap();
        committee.get_or_train(-3.2, stamp(1), toy_sim).unwrap();
        committee.save(dir.path()).unwrap();

        let loaded = Committee::load(dir.path(), loose_config(), delta_grid(2)).unwrap();
        assert_eq!(loaded.len(), committee.len());
        assert_eq!(loaded.stats(), committee.stats());
        for bucket in committee.buckets() {
            assert_eq!(loaded.member(bucket), committee.member(bucket));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        /// Every finite temperature maps to exactly one bucket, the bucket
        /// centre is within 0.25 °C of the input, and bucketing is idempotent
        /// on its own outputs.
        #[test]
        fn bucket_totality(raw in -100.0..100.0f64) {
            let bucket = bucket_of(raw).unwrap();
            prop_assert!((bucket.value_c() - raw).abs() <= 0.25 + 1e-12);
            let again = bucket_of(bucket.value_c()).unwrap();
            prop_assert_eq!(bucket, again);
        }
    }
}
