//! Weather and PV series ingestion.
//!
//! Both files are hourly CSVs with a header row: `timestamp_iso8601,temp_c`
//! for weather and `timestamp_iso8601,pv_kwh` for PV. Timestamps must be
//! strictly increasing with no gaps; validation failures name the offending
//! line.

use super::ScenarioError;
use chrono::{Duration, NaiveDateTime};
use std::path::Path;

/// Hourly external temperature [°C].
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherSeries {
    pub timestamps: Vec<NaiveDateTime>,
    pub temperature_c: Vec<f64>,
}

/// Hourly available PV energy [kWh].
#[derive(Debug, Clone, PartialEq)]
pub struct PvSeries {
    pub timestamps: Vec<NaiveDateTime>,
    pub pv_kwh: Vec<f64>,
}

impl WeatherSeries {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }
}

impl PvSeries {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }
}

pub(crate) fn parse_timestamp(raw: &str) -> Option<NaiveDateTime> {
    let trimmed = raw.trim().trim_end_matches('Z');
    NaiveDateTime::parse_from_str(trimmed, "%Y-%m-%dT%H:%M:%S")
        .or_else(|_| NaiveDateTime::parse_from_str(trimmed, "%Y-%m-%d %H:%M:%S"))
        .ok()
}

fn parse_hourly_csv(
    path: &Path,
    expected_header: &str,
) -> Result<(Vec<NaiveDateTime>, Vec<f64>), ScenarioError> {
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
    if header.trim() != expected_header {
        return Err(parse_err(
            1,
            format!("expected header `{expected_header}`, got `{}`", header.trim()),
        ));
    }

    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let Some((ts_raw, value_raw)) = line.split_once(',') else {
            return Err(parse_err(line_no, format!("expected two fields, got `{line}`")));
        };
        let Some(ts) = parse_timestamp(ts_raw) else {
            return Err(parse_err(line_no, format!("bad timestamp `{}`", ts_raw.trim())));
        };
        let value: f64 = value_raw
            .trim()
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad value `{}`", value_raw.trim())))?;
        if !value.is_finite() {
            return Err(parse_err(line_no, format!("non-finite value {value}")));
        }
        if let Some(&prev) = timestamps.last() {
            let gap: Duration = ts - prev;
            if gap <= Duration::zero() {
                return Err(parse_err(
                    line_no,
                    format!("timestamp {ts} does not increase past {prev}"),
                ));
            }
            if gap != Duration::hours(1) {
                return Err(parse_err(
                    line_no,
                    format!("gap of {} minutes before {ts}; series must be hourly", gap.num_minutes()),
                ));
            }
        }
        timestamps.push(ts);
        values.push(value);
    }
    if timestamps.is_empty() {
        return Err(parse_err(1, "file holds a header but no rows".into()));
    }
    Ok((timestamps, values))
}

/// Loads an hourly weather CSV (`timestamp_iso8601,temp_c`).
pub fn load_weather(path: &Path) -> Result<WeatherSeries, ScenarioError> {
    let (timestamps, temperature_c) = parse_hourly_csv(path, "timestamp_iso8601,temp_c")?;
    Ok(WeatherSeries {
        timestamps,
        temperature_c,
    })
}

/// Loads an hourly PV CSV (`timestamp_iso8601,pv_kwh`); values must be >= 0.
pub fn load_pv(path: &Path) -> Result<PvSeries, ScenarioError> {
    let (timestamps, pv_kwh) = parse_hourly_csv(path, "timestamp_iso8601,pv_kwh")?;
    if let Some(idx) = pv_kwh.iter().position(|&v| v < 0.0) {
        return Err(ScenarioError::SeriesParse {
            path: path.display().to_string(),
            line: idx + 2,
            message: format!("negative PV energy {}", pv_kwh[idx]),
        });
    }
    Ok(PvSeries { timestamps, pv_kwh })
}

/// Checks that weather and PV series align one-to-one.
pub fn check_alignment(weather: &WeatherSeries, pv: &PvSeries) -> Result<(), ScenarioError> {
    if weather.timestamps != pv.timestamps {
        let detail = weather
            .timestamps
            .iter()
            .zip(&pv.timestamps)
            .position(|(a, b)| a != b)
            .map(|i| format!("first divergence at row {}", i + 2))
            .unwrap_or_else(|| {
                format!(
                    "lengths differ: {} weather rows vs {} pv rows",
                    weather.len(),
                    pv.len()
                )
            });
        return Err(ScenarioError::Misaligned(detail));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn empty_file_is_a_parse_error() {
        let f = write_temp("");
        let err = load_weather(f.path()).unwrap_err();
        assert!(matches!(err, ScenarioError::SeriesParse { line: 1, .. }));
    }

    #[test]
    fn well_formed_file_loads() {
        let mut content = String::from("timestamp_iso8601,temp_c\n");
        for day in 15..18 {
            for hour in 0..24 {
                content.push_str(&format!("2024-01-{day:02}T{hour:02}:00:00,9.25\n"));
            }
        }
        let f = write_temp(&content);
        let series = load_weather(f.path()).unwrap();
        assert_eq!(series.len(), 72);
        assert!(series.temperature_c.iter().all(|&t| t == 9.25));
    }

    #[test]
    fn duplicated_hour_names_the_line() {
        let content = "timestamp_iso8601,temp_c\n\
                       2024-01-15T00:00:00,5\n\
                       2024-01-15T01:00:00,5\n\
                       2024-01-15T01:00:00,6\n";
        let f = write_temp(content);
        match load_weather(f.path()).unwrap_err() {
            ScenarioError::SeriesParse { line, message, .. } => {
                assert_eq!(line, 4);
                assert!(message.contains("does not increase"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn gap_names_the_line() {
        let content = "timestamp_iso8601,temp_c\n\
                       2024-01-15T00:00:00,5\n\
                       2024-01-15T02:00:00,5\n";
        let f = write_temp(content);
        match load_weather(f.path()).unwrap_err() {
            ScenarioError::SeriesParse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn negative_pv_is_rejected() {
        let content = "timestamp_iso8601,pv_kwh\n\
                       2024-01-15T00:00:00,0\n\
                       2024-01-15T01:00:00,-1\n";
        let f = write_temp(content);
        match load_pv(f.path()).unwrap_err() {
            ScenarioError::SeriesParse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn wrong_header_is_rejected() {
        let f = write_temp("time,temp\n2024-01-15T00:00:00,5\n");
        assert!(matches!(
            load_weather(f.path()).unwrap_err(),
            ScenarioError::SeriesParse { line: 1, .. }
        ));
    }
}
