//! Flat-file serialization of [`SurrogateTable`].
//!
//! Versioned plain-text format: a `key = value` header carrying the grid
//! definition, learner config and convergence stats, a training-point
//! section, and one `index,inputs…,predicted` row per grid point. Floats are
//! written with Rust's shortest round-trip formatting, so a read-back table
//! compares equal to the original.

use super::{InitStrategy, InputGrid, LearnerConfig, SurrogateTable};
use crate::gp::LengthscalePolicy;
use crate::{Classify, FailureKind};
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

const MAGIC: &str = "pvdr-surrogate-table";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TableIoError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}

impl Classify for TableIoError {
    fn kind(&self) -> FailureKind {
        match self {
            TableIoError::Io { .. } => FailureKind::Io,
            TableIoError::Parse { .. } => FailureKind::Input,
        }
    }
}

fn join_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Renders a table to its flat-file text form.
pub fn table_to_string(table: &SurrogateTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} v{VERSION}");
    let _ = writeln!(out, "dims = {}", table.grid.dims());
    for dim in 0..table.grid.dims() {
        let _ = writeln!(out, "dim {} = {}", dim, join_floats(table.grid.dim_values(dim)));
    }
    let _ = writeln!(out, "std_threshold = {}", table.config.std_threshold);
    let _ = writeln!(out, "jitter = {}", table.config.jitter);
    match &table.config.lengthscale {
        LengthscalePolicy::Fixed(l) => {
            let _ = writeln!(out, "lengthscale = fixed {l}");
        }
        LengthscalePolicy::GridSearch { candidates } => {
            let _ = writeln!(out, "lengthscale = grid {}", join_floats(candidates));
        }
    }
    match &table.config.init {
        InitStrategy::Corners => {
            let _ = writeln!(out, "init = corners");
        }
        InitStrategy::Random { k, seed } => {
            let _ = writeln!(out, "init = random {k} {seed}");
        }
    }
    match table.config.max_iterations {
        Some(m) => {
            let _ = writeln!(out, "max_iterations = {m}");
        }
        None => {
            let _ = writeln!(out, "max_iterations = none");
        }
    }
    let _ = writeln!(out, "converged = {}", table.converged);
    let _ = writeln!(out, "final_max_std = {}", table.final_max_std);
    let _ = writeln!(out, "iteration_count = {}", table.iteration_count);
    let _ = writeln!(out, "simulation_count = {}", table.simulation_count);
    let _ = writeln!(out, "training_points = {}", table.training_inputs.len());

    let _ = writeln!(out, "-- training --");
    for (inputs, output) in table.training_inputs.iter().zip(&table.training_outputs) {
        let mut row: Vec<String> = inputs.iter().map(|v| v.to_string()).collect();
        row.push(output.to_string());
        let _ = writeln!(out, "{}", row.join(","));
    }

    let _ = writeln!(out, "-- grid --");
    for (index, value) in table.predicted.iter().enumerate() {
        let point = table.grid.point(index);
        let mut row: Vec<String> = Vec::with_capacity(point.len() + 2);
        row.push(index.to_string());
        row.extend(point.iter().map(|v| v.to_string()));
        row.push(value.to_string());
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// Writes a table to `path` in the flat-file format.
pub fn write_table(table: &SurrogateTable, path: &Path) -> Result<(), TableIoError> {
    std::fs::write(path, table_to_string(table)).map_err(|source| TableIoError::Io {
        path: path.display().to_string(),
        source,
    })
}

struct Parser<'a> {
    path: String,
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, line: usize, message: impl Into<String>) -> Result<T, TableIoError> {
        Err(TableIoError::Parse {
            path: self.path.clone(),
            line: line + 1,
            message: message.into(),
        })
    }

    fn next_line(&mut self) -> Result<(usize, &'a str), TableIoError> {
        self.lines.next().ok_or_else(|| TableIoError::Parse {
            path: self.path.clone(),
            line: 0,
            message: "unexpected end of file".into(),
        })
    }

    fn expect_key(&mut self, key: &str) -> Result<(usize, String), TableIoError> {
        let (n, line) = self.next_line()?;
        let Some((k, v)) = line.split_once('=') else {
            return self.err(n, format!("expected `{key} = ...`, got `{line}`"));
        };
        if k.trim() != key && !k.trim().starts_with(key) {
            return self.err(n, format!("expected key `{key}`, got `{}`", k.trim()));
        }
        Ok((n, v.trim().to_string()))
    }
}

fn parse_floats(raw: &str) -> Option<Vec<f64>> {
    raw.split_whitespace().map(|t| t.parse::<f64>().ok()).collect()
}

/// Parses a table from its flat-file text form.
pub fn table_from_str(text: &str, path_label: &str) -> Result<SurrogateTable, TableIoError> {
    let mut p = Parser {
        path: path_label.to_string(),
        lines: text.lines().enumerate(),
    };

    let (n, header) = p.next_line()?;
    if header.trim() != format!("{MAGIC} v{VERSION}") {
        return p.err(n, format!("bad header `{header}`"));
    }

    let (n, dims_raw) = p.expect_key("dims")?;
    let dims: usize = dims_raw
        .parse()
        .map_err(|_| TableIoError::Parse {
            path: p.path.clone(),
            line: n + 1,
            message: format!("bad dims `{dims_raw}`"),
        })?;

    let mut dim_values = Vec::with_capacity(dims);
    for d in 0..dims {
        let (n, raw) = p.expect_key(&format!("dim {d}"))?;
        let values = parse_floats(&raw)
            .filter(|v| !v.is_empty())
            .ok_or_else(|| TableIoError::Parse {
                path: p.path.clone(),
                line: n + 1,
                message: format!("bad dim {d} values"),
            })?;
        dim_values.push(values);
    }
    let grid = InputGrid::new(dim_values).map_err(|e| TableIoError::Parse {
        path: p.path.clone(),
        line: 0,
        message: e.to_string(),
    })?;

    let (n, threshold_raw) = p.expect_key("std_threshold")?;
    let std_threshold: f64 = threshold_raw.parse().map_err(|_| TableIoError::Parse {
        path: p.path.clone(),
        line: n + 1,
        message: "bad std_threshold".into(),
    })?;
    let (n, jitter_raw) = p.expect_key("jitter")?;
    let jitter: f64 = jitter_raw.parse().map_err(|_| TableIoError::Parse {
        path: p.path.clone(),
        line: n + 1,
        message: "bad jitter".into(),
    })?;

    let (n, lengthscale_raw) = p.expect_key("lengthscale")?;
    let lengthscale = {
        let mut parts = lengthscale_raw.splitn(2, ' ');
        match (parts.next(), parts.next()) {
            (Some("fixed"), Some(v)) => v
                .parse::<f64>()
                .ok()
                .map(LengthscalePolicy::Fixed),
            (Some("grid"), Some(rest)) => parse_floats(rest)
                .map(|candidates| LengthscalePolicy::GridSearch { candidates }),
            _ => None,
        }
        .ok_or_else(|| TableIoError::Parse {
            path: p.path.clone(),
            line: n + 1,
            message: format!("bad lengthscale `{lengthscale_raw}`"),
        })?
    };

    let (n, init_raw) = p.expect_key("init")?;
    let init = {
        let parts: Vec<&str> = init_raw.split_whitespace().collect();
        match parts.as_slice() {
            ["corners"] => Some(InitStrategy::Corners),
            ["random", k, seed] => match (k.parse(), seed.parse()) {
                (Ok(k), Ok(seed)) => Some(InitStrategy::Random { k, seed }),
                _ => None,
            },
            _ => None,
        }
        .ok_or_else(|| TableIoError::Parse {
            path: p.path.clone(),
            line: n + 1,
            message: format!("bad init `{init_raw}`"),
        })?
    };

    let (n, max_iter_raw) = p.expect_key("max_iterations")?;
    let max_iterations = if max_iter_raw == "none" {
        None
    } else {
        Some(max_iter_raw.parse::<usize>().map_err(|_| TableIoError::Parse {
            path: p.path.clone(),
            line: n + 1,
            message: "bad max_iterations".into(),
        })?)
    };

    let (_, converged_raw) = p.expect_key("converged")?;
    let converged = converged_raw == "true";
    let (n, fms_raw) = p.expect_key("final_max_std")?;
    let final_max_std: f64 = fms_raw.parse().map_err(|_| TableIoError::Parse {
        path: p.path.clone(),
        line: n + 1,
        message: "bad final_max_std".into(),
    })?;
    let (_, iter_raw) = p.expect_key("iteration_count")?;
    let iteration_count: usize = iter_raw.parse().unwrap_or(0);
    let (_, sims_raw) = p.expect_key("simulation_count")?;
    let simulation_count: usize = sims_raw.parse().unwrap_or(0);
    let (n, train_raw) = p.expect_key("training_points")?;
    let training_count: usize = train_raw.parse().map_err(|_| TableIoError::Parse {
        path: p.path.clone(),
        line: n + 1,
        message: "bad training_points".into(),
    })?;

    let (n, marker) = p.next_line()?;
    if marker.trim() != "-- training --" {
        return p.err(n, "expected `-- training --`");
    }
    let mut training_inputs = Vec::with_capacity(training_count);
    let mut training_outputs = Vec::with_capacity(training_count);
    for _ in 0..training_count {
        let (n, line) = p.next_line()?;
        let fields: Option<Vec<f64>> = line.split(',').map(|t| t.trim().parse().ok()).collect();
        let Some(fields) = fields else {
            return p.err(n, format!("bad training row `{line}`"));
        };
        if fields.len() != dims + 1 {
            return p.err(n, format!("training row has {} fields, expected {}", fields.len(), dims + 1));
        }
        training_inputs.push(fields[..dims].to_vec());
        training_outputs.push(fields[dims]);
    }

    let (n, marker) = p.next_line()?;
    if marker.trim() != "-- grid --" {
        return p.err(n, "expected `-- grid --`");
    }
    let mut predicted = vec![0.0; grid.len()];
    for expected_index in 0..grid.len() {
        let (n, line) = p.next_line()?;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dims + 2 {
            return p.err(n, format!("grid row has {} fields, expected {}", fields.len(), dims + 2));
        }
        let index: usize = fields[0].trim().parse().map_err(|_| TableIoError::Parse {
            path: p.path.clone(),
            line: n + 1,
            message: "bad grid index".into(),
        })?;
        if index != expected_index {
            return p.err(n, format!("grid rows out of order: {index} vs {expected_index}"));
        }
        predicted[index] = fields[dims + 1].trim().parse().map_err(|_| TableIoError::Parse {
            path: p.path.clone(),
            line: n + 1,
            message: "bad predicted value".into(),
        })?;
    }

    Ok(SurrogateTable {
        grid,
        predicted,
        final_max_std,
        training_inputs,
        training_outputs,
        iteration_count,
        simulation_count,
        converged,
        config: LearnerConfig {
            std_threshold,
            init,
            max_iterations,
            lengthscale,
            jitter,
        },
    })
}

/// Reads a table back from a flat file.
pub fn read_table(path: &Path) -> Result<SurrogateTable, TableIoError> {
    let text = std::fs::read_to_string(path).map_err(|source| TableIoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    table_from_str(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_table() -> SurrogateTable {
        let grid = InputGrid::new(vec![vec![-1.0, 0.0, 1.0, 2.0], vec![5.0, 10.0]]).unwrap();
        SurrogateTable {
            predicted: (0..grid.len()).map(|i| i as f64 * 0.37 + 0.001).collect(),
            grid,
            final_max_std: 0.007_345_678_912,
            training_inputs: vec![vec![-1.0, 5.0], vec![2.0, 10.0], vec![0.0, 5.0]],
            training_outputs: vec![1.25, 3.5e-7, 2.0],
            iteration_count: 1,
            simulation_count: 3,
            converged: true,
            config: LearnerConfig::default(),
        }
    }

    #[test]
    fn round_trip_is_lossless() {
        let table = sample_table();
        let text = table_to_string(&table);
        let back = table_from_str(&text, "test").unwrap();
        assert_eq!(back, table);
    }

    #[test]
    fn round_trip_random_init_and_grid_policy() {
        let mut table = sample_table();
        table.config.init = InitStrategy::Random { k: 7, seed: 99 };
        table.config.lengthscale = LengthscalePolicy::GridSearch {
            candidates: vec![0.5, 1.0, 2.0],
        };
        table.config.max_iterations = Some(123);
        table.converged = false;
        let back = table_from_str(&table_to_string(&table), "test").unwrap();
        assert_eq!(back, table);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let table = sample_table();
        let text = table_to_string(&table);
        // Corrupt the first grid row's predicted value.
        let marker = text
            .lines()
            .position(|l| l.trim() == "-- grid --")
            .unwrap();
        let corrupted: Vec<String> = text
            .lines()
            .enumerate()
            .map(|(i, l)| {
                if i == marker + 1 {
                    l.rsplit_once(',').map(|(head, _)| format!("{head},oops")).unwrap()
                } else {
                    l.to_string()
                }
            })
            .collect();
        let err = table_from_str(&corrupted.join("\n"), "corrupted").unwrap_err();
        match err {
            TableIoError::Parse { path, line, .. } => {
                assert_eq!(path, "corrupted");
                assert_eq!(line, marker + 2);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.txt");
        let table = sample_table();
        write_table(&table, &path).unwrap();
        let back = read_table(&path).unwrap();
        assert_eq!(back, table);
    }
}
