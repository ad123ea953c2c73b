//! Report emission and re-ingestion.
//!
//! Every run writes the same family of files into its output directory:
//!
//! * `hourly.csv` — one row per hour, the unit of all downstream analysis.
//! * `summary.txt` — `key = value` totals and rates.
//! * `fig_weather.csv`, `fig_committee.csv`, `fig_energy.csv`,
//!   `fig_rates.csv` — plot-ready extracts.
//! * `timings.txt` — wall-clock measurements. This is the one file that
//!   varies between reruns; everything else is byte-identical for the same
//!   config and seed.

use super::{HourlyRecord, RunReport, ScenarioError};
use crate::metrics::{ArmSummary, ComparisonSummary, EnergyLedger};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf, ScenarioError> {
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(path)
}

fn fmt_opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_else(|| "undefined".into())
}

fn hourly_csv(records: &[HourlyRecord]) -> String {
    let rooms = records.first().map(|r| r.setpoints_c.len()).unwrap_or(0);
    let mut out = String::from("timestamp,t_ext,bucket,mode");
    for i in 0..rooms {
        let _ = write!(out, ",sp_{i}");
    }
    out.push_str(",consumed_kwh,pv_kwh,exported_kwh,imported_kwh");
    for i in 0..rooms {
        let _ = write!(out, ",temp_{i}");
    }
    out.push_str(",new_model,cum_sims\n");

    for r in records {
        let _ = write!(
            out,
            "{},{},{},{}",
            r.timestamp.format("%Y-%m-%dT%H:%M:%S"),
            r.t_ext_c,
            r.bucket,
            r.mode.as_str()
        );
        for sp in &r.setpoints_c {
            let _ = write!(out, ",{sp}");
        }
        let _ = write!(
            out,
            ",{},{},{},{}",
            r.consumed_kwh, r.pv_kwh, r.exported_kwh, r.imported_kwh
        );
        for t in &r.room_temps_c {
            let _ = write!(out, ",{t}");
        }
        let _ = writeln!(out, ",{},{}", u8::from(r.new_model), r.cum_sims);
    }
    out
}

fn summary_text(report: &RunReport) -> String {
    let arm = ArmSummary::of(&report.ledger);
    let mut out = String::new();
    let _ = writeln!(out, "horizon_hours = {}", report.records.len());
    let _ = writeln!(out, "total_consumed_kwh = {}", arm.total_consumed_kwh);
    let _ = writeln!(out, "total_produced_kwh = {}", arm.total_produced_kwh);
    let _ = writeln!(out, "total_exported_kwh = {}", arm.total_exported_kwh);
    let _ = writeln!(out, "total_imported_kwh = {}", arm.total_imported_kwh);
    let _ = writeln!(out, "scr_window = {}", fmt_opt(arm.scr_window));
    let _ = writeln!(out, "ssr_window = {}", fmt_opt(arm.ssr_window));
    let _ = writeln!(out, "mean_hourly_scr = {}", fmt_opt(arm.mean_hourly_scr));
    let _ = writeln!(out, "mean_hourly_ssr = {}", fmt_opt(arm.mean_hourly_ssr));
    let _ = writeln!(out, "models_created = {}", report.committee_stats.models_created);
    let _ = writeln!(
        out,
        "total_training_simulations = {}",
        report.committee_stats.total_simulations
    );
    out
}

fn timings_text(report: &RunReport) -> String {
    let t = &report.timings;
    let mut out = String::new();
    let _ = writeln!(out, "# wall-clock measurements; expect run-to-run variation");
    let _ = writeln!(out, "training_wall_s = {:.6}", t.training_wall_s);
    let _ = writeln!(out, "sim_calls = {}", t.sim_calls);
    let _ = writeln!(out, "sim_wall_s = {:.6}", t.sim_wall_s);
    let _ = writeln!(out, "time_per_sim_ms = {:.6}", t.time_per_sim_ms());
    let _ = writeln!(out, "decisions = {}", t.decisions);
    let _ = writeln!(out, "decision_wall_s = {:.6}", t.decision_wall_s);
    if t.sim_wall_s > 0.0 {
        let _ = writeln!(out, "sim_rate_per_s = {:.2}", t.sim_calls as f64 / t.sim_wall_s);
    }
    out
}

fn fig_committee_csv(records: &[HourlyRecord]) -> String {
    let mut out = String::from("timestamp,models,cum_sims\n");
    let mut models = 0usize;
    for r in records {
        if r.new_model {
            models += 1;
        }
        let _ = writeln!(
            out,
            "{},{},{}",
            r.timestamp.format("%Y-%m-%dT%H:%M:%S"),
            models,
            r.cum_sims
        );
    }
    out
}

fn fig_energy_csv(records: &[HourlyRecord]) -> String {
    let mut out = String::from("timestamp,pv_kwh,consumed_kwh,exported_kwh,imported_kwh\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.timestamp.format("%Y-%m-%dT%H:%M:%S"),
            r.pv_kwh,
            r.consumed_kwh,
            r.exported_kwh,
            r.imported_kwh
        );
    }
    out
}

fn fig_rates_csv(records: &[HourlyRecord]) -> String {
    // Hourly SCR/SSR, blank when undefined (no production / no consumption).
    let mut out = String::from("timestamp,scr_hour,ssr_hour\n");
    for r in records {
        let self_consumed = r.pv_kwh - r.exported_kwh;
        let scr = if r.pv_kwh > 0.0 {
            (self_consumed / r.pv_kwh).to_string()
        } else {
            String::new()
        };
        let ssr = if r.pv_kwh > 0.0 && r.consumed_kwh > 0.0 {
            (self_consumed / r.consumed_kwh).to_string()
        } else {
            String::new()
        };
        let _ = writeln!(
            out,
            "{},{},{}",
            r.timestamp.format("%Y-%m-%dT%H:%M:%S"),
            scr,
            ssr
        );
    }
    out
}

fn fig_weather_csv(records: &[HourlyRecord]) -> String {
    let mut out = String::from("timestamp,temp_c,bucket\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{}",
            r.timestamp.format("%Y-%m-%dT%H:%M:%S"),
            r.t_ext_c,
            r.bucket
        );
    }
    out
}

/// Writes the full report file family into `dir`, creating it if needed.
/// Returns the paths written.
pub fn emit_report(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>, ScenarioError> {
    std::fs::create_dir_all(dir).map_err(|source| ScenarioError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();
    written.push(write_file(dir, "hourly.csv", &hourly_csv(&report.records))?);
    written.push(write_file(dir, "summary.txt", &summary_text(report))?);
    written.push(write_file(dir, "fig_weather.csv", &fig_weather_csv(&report.records))?);
    written.push(write_file(dir, "fig_committee.csv", &fig_committee_csv(&report.records))?);
    written.push(write_file(dir, "fig_energy.csv", &fig_energy_csv(&report.records))?);
    written.push(write_file(dir, "fig_rates.csv", &fig_rates_csv(&report.records))?);
    written.push(write_file(dir, "timings.txt", &timings_text(report))?);
    Ok(written)
}

/// Recomputes an energy ledger from an emitted `hourly.csv`, independently of
/// the in-memory report that wrote it.
pub fn read_hourly_ledger(path: &Path) -> Result<EnergyLedger, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let path_label = path.display().to_string();
    let parse_err = |line: usize, message: String| ScenarioError::SeriesParse {
        path: path_label.clone(),
        line,
        message,
    };

    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(parse_err(1, "empty file".into()));
    };
    let columns: Vec<&str> = header.split(',').collect();
    let consumed_idx = columns
        .iter()
        .position(|&c| c == "consumed_kwh")
        .ok_or_else(|| parse_err(1, "missing consumed_kwh column".into()))?;
    let pv_idx = columns
        .iter()
        .position(|&c| c == "pv_kwh")
        .ok_or_else(|| parse_err(1, "missing pv_kwh column".into()))?;

    let mut ledger = EnergyLedger::default();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(parse_err(i + 1, format!("row has {} fields, expected {}", fields.len(), columns.len())));
        }
        let consumed: f64 = fields[consumed_idx]
            .parse()
            .map_err(|_| parse_err(i + 1, "bad consumed_kwh".into()))?;
        let pv: f64 = fields[pv_idx]
            .parse()
            .map_err(|_| parse_err(i + 1, "bad pv_kwh".into()))?;
        ledger.push_hour(pv, consumed);
    }
    if ledger.is_empty() {
        return Err(parse_err(1, "no data rows".into()));
    }
    Ok(ledger)
}

fn comparison_kv(summary: &ComparisonSummary) -> String {
    let mut out = String::new();
    for (arm, label) in [(&summary.controlled, "controlled"), (&summary.baseline, "baseline")] {
        let _ = writeln!(out, "{label}_total_consumed_kwh = {}", arm.total_consumed_kwh);
        let _ = writeln!(out, "{label}_total_produced_kwh = {}", arm.total_produced_kwh);
        let _ = writeln!(out, "{label}_total_exported_kwh = {}", arm.total_exported_kwh);
        let _ = writeln!(out, "{label}_total_imported_kwh = {}", arm.total_imported_kwh);
        let _ = writeln!(out, "{label}_scr_window = {}", fmt_opt(arm.scr_window));
        let _ = writeln!(out, "{label}_ssr_window = {}", fmt_opt(arm.ssr_window));
        let _ = writeln!(out, "{label}_mean_hourly_scr = {}", fmt_opt(arm.mean_hourly_scr));
        let _ = writeln!(out, "{label}_mean_hourly_ssr = {}", fmt_opt(arm.mean_hourly_ssr));
    }
    let _ = writeln!(out, "consumption_delta_pct = {}", summary.consumption_delta_pct);
    let _ = writeln!(out, "scr_delta = {}", fmt_opt(summary.scr_delta));
    let _ = writeln!(out, "ssr_delta = {}", fmt_opt(summary.ssr_delta));
    out
}

fn comparison_text(summary: &ComparisonSummary) -> String {
    let c = &summary.controlled;
    let b = &summary.baseline;
    let mut out = String::new();
    let _ = writeln!(out, "Controlled vs baseline over the same horizon and weather");
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "  consumption: {:.2} kWh controlled vs {:.2} kWh baseline ({:+.2} %)",
        c.total_consumed_kwh, b.total_consumed_kwh, summary.consumption_delta_pct
    );
    let _ = writeln!(
        out,
        "  SCR (window): {} vs {}",
        fmt_opt(c.scr_window),
        fmt_opt(b.scr_window)
    );
    let _ = writeln!(
        out,
        "  SSR (window): {} vs {}",
        fmt_opt(c.ssr_window),
        fmt_opt(b.ssr_window)
    );
    let _ = writeln!(
        out,
        "  mean hourly SCR (daylight): {} vs {}",
        fmt_opt(c.mean_hourly_scr),
        fmt_opt(b.mean_hourly_scr)
    );
    let _ = writeln!(
        out,
        "  mean hourly SSR (daylight): {} vs {}",
        fmt_opt(c.mean_hourly_ssr),
        fmt_opt(b.mean_hourly_ssr)
    );
    out
}

/// Writes the controlled-vs-baseline comparison as human-readable text plus a
/// machine-readable key-value file.
pub fn emit_comparison(
    summary: &ComparisonSummary,
    dir: &Path,
) -> Result<Vec<PathBuf>, ScenarioError> {
    std::fs::create_dir_all(dir).map_err(|source| ScenarioError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    Ok(vec![
        write_file(dir, "comparison.txt", &comparison_text(summary))?,
        write_file(dir, "comparison.kv", &comparison_kv(summary))?,
    ])
}
