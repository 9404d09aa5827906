//! Hourly market time-series ingestion: CSV loading, gap handling, negative
//! price clamping, currency conversion and multi-series day alignment.
//!
//! Cleaning rules: a day containing two or more consecutive missing hours is
//! dropped entirely; an isolated missing hour is replaced by the mean of its
//! neighbours; days are UTC calendar days and only complete 24-hour days are
//! retained.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use chrono::{DateTime, NaiveDate, TimeZone, Utc};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: malformed timestamp {text:?}")]
    Timestamp { line: usize, text: String },
    #[error("line {line}: timestamps not strictly increasing hourly ({text})")]
    Ordering { line: usize, text: String },
    #[error("line {line}: unparseable value {text:?}")]
    Value { line: usize, text: String },
    #[error("line {line}: expected `timestamp,value` columns")]
    Columns { line: usize },
    #[error("unknown unit {0:?}")]
    UnknownUnit(String),
    #[error("operation requires a price series, got {0}")]
    NotAPrice(Unit),
    #[error("series already in EUR/MWh")]
    AlreadyEur,
    #[error("conversion factor must be positive, got {0}")]
    BadFactor(f64),
    #[error("empty series")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Unit {
    EurPerMwh,
    GbpPerMwh,
    Mw,
    Mwh,
}

impl Unit {
    pub fn is_price(self) -> bool {
        matches!(self, Unit::EurPerMwh | Unit::GbpPerMwh)
    }

    pub fn parse(text: &str) -> Result<Self, IngestError> {
        match text.trim().to_ascii_lowercase().as_str() {
            "eur/mwh" => Ok(Unit::EurPerMwh),
            "gbp/mwh" => Ok(Unit::GbpPerMwh),
            "mw" => Ok(Unit::Mw),
            "mwh" => Ok(Unit::Mwh),
            other => Err(IngestError::UnknownUnit(other.to_string())),
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Unit::EurPerMwh => "EUR/MWh",
            Unit::GbpPerMwh => "GBP/MWh",
            Unit::Mw => "MW",
            Unit::Mwh => "MWh",
        };
        f.write_str(s)
    }
}

/// What a series file contains: a name for reporting and its unit.
#[derive(Debug, Clone)]
pub struct SeriesSchema {
    pub name: String,
    pub unit: Unit,
}

impl SeriesSchema {
    pub fn new(name: &str, unit: Unit) -> Self {
        SeriesSchema {
            name: name.to_string(),
            unit,
        }
    }
}

/// As-loaded hourly series; missing cells are explicit.
#[derive(Debug, Clone)]
pub struct RawSeries {
    pub name: String,
    pub unit: Unit,
    pub timestamps: Vec<DateTime<Utc>>,
    pub values: Vec<Option<f64>>,
}

impl RawSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }
}

/// Per-hour provenance after cleaning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Flag {
    Observed,
    Interpolated,
    Clamped,
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Flag::Observed => "observed",
            Flag::Interpolated => "interpolated",
            Flag::Clamped => "clamped",
        };
        f.write_str(s)
    }
}

/// Gap-free series over retained UTC days (24 values per day).
#[derive(Debug, Clone)]
pub struct CleanSeries {
    pub name: String,
    pub unit: Unit,
    pub days: Vec<NaiveDate>,
    pub values: Vec<f64>,
    pub flags: Vec<Flag>,
}

impl CleanSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn timestamps(&self) -> Vec<DateTime<Utc>> {
        self.days
            .iter()
            .flat_map(|d| {
                (0..24).map(|h| Utc.from_utc_datetime(&d.and_hms_opt(h, 0, 0).expect("valid hour")))
            })
            .collect()
    }

    /// CSV rendering with the provenance column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("timestamp,value,flag\n");
        for (ts, (v, f)) in self
            .timestamps()
            .iter()
            .zip(self.values.iter().zip(&self.flags))
        {
            out.push_str(&format!(
                "{},{},{}\n",
                ts.format("%Y-%m-%dT%H:%M:%SZ"),
                v,
                f
            ));
        }
        out
    }
}

/// Counts emitted by the cleaning pass.
#[derive(Debug, Clone, Default, Serialize)]
pub struct CleaningReport {
    pub series: String,
    pub input_hours: usize,
    pub retained_days: usize,
    pub dropped_days: usize,
    pub interpolated_hours: usize,
    pub clamped_hours: usize,
    pub boundary_gap_days: usize,
}

fn parse_timestamp(text: &str) -> Option<DateTime<Utc>> {
    let t = text.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(t) {
        return Some(dt.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M"] {
        if let Ok(naive) = chrono::NaiveDateTime::parse_from_str(t, fmt) {
            return Some(Utc.from_utc_datetime(&naive));
        }
    }
    None
}

/// Parses `timestamp,value` CSV text into a raw series. Empty value cells
/// are explicit missing markers, never zeros.
pub fn parse_series(text: &str, schema: &SeriesSchema) -> Result<RawSeries, IngestError> {
    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    let mut seen_header = false;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.starts_with('#') {
            continue; // provenance comments written by the tooling
        }
        if !seen_header {
            seen_header = true;
            if line.to_ascii_lowercase().starts_with("timestamp") {
                continue;
            }
        }
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let mut parts = line.splitn(2, ',');
        let ts_text = parts.next().unwrap_or("");
        let value_text = parts.next().ok_or(IngestError::Columns { line: lineno })?;
        let ts = parse_timestamp(ts_text).ok_or_else(|| IngestError::Timestamp {
            line: lineno,
            text: ts_text.to_string(),
        })?;
        if let Some(prev) = timestamps.last() {
            let delta = ts.signed_duration_since(*prev);
            if delta.num_seconds() != 3600 {
                return Err(IngestError::Ordering {
                    line: lineno,
                    text: format!("{prev} -> {ts}"),
                });
            }
        }
        let cell = value_text.trim();
        let value = if cell.is_empty() {
            None
        } else {
            let v: f64 = cell.parse().map_err(|_| IngestError::Value {
                line: lineno,
                text: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(IngestError::Value {
                    line: lineno,
                    text: cell.to_string(),
                });
            }
            Some(v)
        };
        timestamps.push(ts);
        values.push(value);
    }
    Ok(RawSeries {
        name: schema.name.clone(),
        unit: schema.unit,
        timestamps,
        values,
    })
}

/// Loads one CSV series file.
pub fn load_series(path: &Path, schema: &SeriesSchema) -> Result<RawSeries, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_series(&text, schema)
}

/// Applies the gap rules and returns the gap-free series plus its report.
pub fn clean_series(raw: &RawSeries) -> Result<(CleanSeries, CleaningReport), IngestError> {
    if raw.is_empty() {
        return Err(IngestError::Empty);
    }
    let n = raw.len();
    let mut report = CleaningReport {
        series: raw.name.clone(),
        input_hours: n,
        ..CleaningReport::default()
    };

    // Runs of consecutive missing hours of length >= 2 poison every day they
    // touch; isolated boundary gaps (no neighbour on one side) poison their
    // day as well.
    let mut dropped: BTreeSet<NaiveDate> = BTreeSet::new();
    let mut filled = vec![f64::NAN; n];
    let mut flags = vec![Flag::Observed; n];
    let mut i = 0;
    while i < n {
        match raw.values[i] {
            Some(v) => {
                filled[i] = v;
                i += 1;
            }
            None => {
                let start = i;
                while i < n && raw.values[i].is_none() {
                    i += 1;
                }
                let run = i - start;
                let at_boundary = start == 0 || i == n;
                if run >= 2 || at_boundary {
                    for k in start..i {
                        dropped.insert(raw.timestamps[k].date_naive());
                    }
                    if at_boundary && run == 1 {
                        report.boundary_gap_days += 1;
                    }
                } else {
                    let prev = raw.values[start - 1].expect("run bounds are observed");
                    let next = raw.values[i].expect("run bounds are observed");
                    filled[start] = 0.5 * (prev + next);
                    flags[start] = Flag::Interpolated;
                }
            }
        }
    }

    // Only complete 24-hour UTC days survive.
    let mut day_hours: std::collections::BTreeMap<NaiveDate, u32> = Default::default();
    for ts in &raw.timestamps {
        *day_hours.entry(ts.date_naive()).or_insert(0) += 1;
    }
    for (day, hours) in &day_hours {
        if *hours != 24 {
            dropped.insert(*day);
        }
    }

    let mut days = Vec::new();
    let mut values = Vec::new();
    let mut out_flags = Vec::new();
    let mut interpolated = 0usize;
    for (k, ts) in raw.timestamps.iter().enumerate() {
        let day = ts.date_naive();
        if dropped.contains(&day) {
            continue;
        }
        if days.last() != Some(&day) {
            days.push(day);
        }
        values.push(filled[k]);
        out_flags.push(flags[k]);
        if flags[k] == Flag::Interpolated {
            interpolated += 1;
        }
    }
    debug_assert_eq!(values.len() % 24, 0);
    report.retained_days = days.len();
    report.dropped_days = day_hours.len() - days.len();
    report.interpolated_hours = interpolated;
    Ok((
        CleanSeries {
            name: raw.name.clone(),
            unit: raw.unit,
            days,
            values,
            flags: out_flags,
        },
        report,
    ))
}

/// Saturates negative prices at zero; returns the new series and the count
/// of clamped hours.
pub fn clamp_negative_prices(series: &CleanSeries) -> Result<(CleanSeries, usize), IngestError> {
    if !series.unit.is_price() {
        return Err(IngestError::NotAPrice(series.unit));
    }
    let mut out = series.clone();
    let mut clamped = 0usize;
    for (v, f) in out.values.iter_mut().zip(out.flags.iter_mut()) {
        if *v < 0.0 {
            *v = 0.0;
            *f = Flag::Clamped;
            clamped += 1;
        }
    }
    Ok((out, clamped))
}

/// GBP/MWh -> EUR/MWh conversion at a fixed factor.
pub fn convert_currency(series: &CleanSeries, factor: f64) -> Result<CleanSeries, IngestError> {
    match series.unit {
        Unit::GbpPerMwh => {}
        Unit::EurPerMwh => return Err(IngestError::AlreadyEur),
        other => return Err(IngestError::NotAPrice(other)),
    }
    if !(factor > 0.0) {
        return Err(IngestError::BadFactor(factor));
    }
    let mut out = series.clone();
    out.unit = Unit::EurPerMwh;
    for v in out.values.iter_mut() {
        *v *= factor;
    }
    Ok(out)
}

/// Restricts every series to the calendar days retained in all of them, so
/// a joint optimization horizon has complete data everywhere.
pub fn align_days(series: &[CleanSeries]) -> Vec<CleanSeries> {
    if series.is_empty() {
        return Vec::new();
    }
    let mut common: BTreeSet<NaiveDate> = series[0].days.iter().copied().collect();
    for s in &series[1..] {
        let days: BTreeSet<NaiveDate> = s.days.iter().copied().collect();
        common = common.intersection(&days).copied().collect();
    }
    series
        .iter()
        .map(|s| {
            let mut days = Vec::new();
            let mut values = Vec::new();
            let mut flags = Vec::new();
            for (d, day) in s.days.iter().enumerate() {
                if common.contains(day) {
                    days.push(*day);
                    values.extend_from_slice(&s.values[24 * d..24 * (d + 1)]);
                    flags.extend_from_slice(&s.flags[24 * d..24 * (d + 1)]);
                }
            }
            CleanSeries {
                name: s.name.clone(),
                unit: s.unit,
                days,
                values,
                flags,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stamp(day: u32, hour: u32) -> String {
        format!("2019-01-{day:02}T{hour:02}:00:00Z")
    }

    fn csv_for(days: usize, missing: &[(u32, u32)]) -> String {
        let mut out = String::from("timestamp,value\n");
        for d in 1..=days as u32 {
            for h in 0..24 {
                let cell = if missing.contains(&(d, h)) {
                    String::new()
                } else {
                    format!("{}", 20.0 + h as f64)
                };
                out.push_str(&format!("{},{}\n", stamp(d, h), cell));
            }
        }
        out
    }

    fn schema() -> SeriesSchema {
        SeriesSchema::new("be_price", Unit::EurPerMwh)
    }

    #[test]
    fn complete_file_passes_through() {
        let raw = parse_series(&csv_for(1, &[]), &schema()).unwrap();
        assert_eq!(raw.len(), 24);
        assert_eq!(raw.missing_count(), 0);
        let (clean, report) = clean_series(&raw).unwrap();
        assert_eq!(clean.len(), 24);
        assert_eq!(report.retained_days, 1);
        assert!(clean.flags.iter().all(|f| *f == Flag::Observed));
    }

    #[test]
    fn empty_cell_becomes_missing_marker() {
        let raw = parse_series(&csv_for(1, &[(1, 7)]), &schema()).unwrap();
        assert_eq!(raw.values[7], None);
        assert_eq!(raw.missing_count(), 1);
    }

    #[test]
    fn duplicate_timestamp_is_an_ordering_error() {
        let mut text = String::from("timestamp,value\n");
        text.push_str(&format!("{},1.0\n", stamp(1, 0)));
        text.push_str(&format!("{},2.0\n", stamp(1, 0)));
        assert!(matches!(
            parse_series(&text, &schema()),
            Err(IngestError::Ordering { .. })
        ));
    }

    #[test]
    fn single_gap_interpolates_to_neighbour_mean() {
        let mut text = String::from("timestamp,value\n");
        for h in 0..24 {
            let cell = match h {
                4 => "30".to_string(),
                5 => String::new(),
                6 => "50".to_string(),
                _ => "10".to_string(),
            };
            text.push_str(&format!("{},{}\n", stamp(1, h), cell));
        }
        let raw = parse_series(&text, &schema()).unwrap();
        let (clean, report) = clean_series(&raw).unwrap();
        assert_eq!(clean.values[5], 40.0);
        assert_eq!(clean.flags[5], Flag::Interpolated);
        assert_eq!(report.interpolated_hours, 1);
        assert_eq!(report.retained_days, 1);
    }

    #[test]
    fn consecutive_gap_drops_the_day() {
        let raw = parse_series(&csv_for(3, &[(2, 5), (2, 6)]), &schema()).unwrap();
        let (clean, report) = clean_series(&raw).unwrap();
        assert_eq!(report.retained_days, 2);
        assert_eq!(report.dropped_days, 1);
        assert_eq!(clean.days.len(), 2);
        assert!(
            clean.days.iter().all(|d| chrono::Datelike::day(d) != 2),
            "day 2 must be dropped"
        );
        assert_eq!(clean.len(), 48);
    }

    #[test]
    fn boundary_gap_drops_day_with_warning() {
        let raw = parse_series(&csv_for(2, &[(1, 0)]), &schema()).unwrap();
        let (clean, report) = clean_series(&raw).unwrap();
        assert_eq!(report.boundary_gap_days, 1);
        assert_eq!(report.retained_days, 1);
        assert_eq!(clean.days.len(), 1);
    }

    #[test]
    fn cleaning_is_idempotent() {
        let raw = parse_series(&csv_for(4, &[(2, 5), (2, 6), (3, 11)]), &schema()).unwrap();
        let (clean, _) = clean_series(&raw).unwrap();
        let as_raw = RawSeries {
            name: clean.name.clone(),
            unit: clean.unit,
            timestamps: clean.timestamps(),
            values: clean.values.iter().map(|v| Some(*v)).collect(),
        };
        let (again, report) = clean_series(&as_raw).unwrap();
        assert_eq!(again.values, clean.values);
        assert_eq!(again.days, clean.days);
        assert_eq!(report.dropped_days, 0);
    }

    #[test]
    fn clamping_saturates_at_zero_and_counts() {
        let raw = parse_series(&csv_for(1, &[]), &schema()).unwrap();
        let (mut clean, _) = clean_series(&raw).unwrap();
        clean.values[3] = -5.0;
        let (clamped, count) = clamp_negative_prices(&clean).unwrap();
        assert_eq!(count, 1);
        assert_eq!(clamped.values[3], 0.0);
        assert_eq!(clamped.flags[3], Flag::Clamped);
        // Nonnegative values keep their order and magnitudes.
        for (a, b) in clean.values.iter().zip(&clamped.values) {
            assert!(b <= a || *a < 0.0);
        }
        let (again, zero) = clamp_negative_prices(&clamped).unwrap();
        assert_eq!(zero, 0);
        assert_eq!(again.values, clamped.values);
    }

    #[test]
    fn clamping_requires_price_unit() {
        let raw = parse_series(&csv_for(1, &[]), &SeriesSchema::new("flow", Unit::Mw)).unwrap();
        let (clean, _) = clean_series(&raw).unwrap();
        assert!(matches!(
            clamp_negative_prices(&clean),
            Err(IngestError::NotAPrice(Unit::Mw))
        ));
    }

    #[test]
    fn currency_conversion_scales_and_retags() {
        let raw =
            parse_series(&csv_for(1, &[]), &SeriesSchema::new("uk", Unit::GbpPerMwh)).unwrap();
        let (clean, _) = clean_series(&raw).unwrap();
        let eur = convert_currency(&clean, 1.16).unwrap();
        assert_eq!(eur.unit, Unit::EurPerMwh);
        assert!((eur.values[0] - 20.0 * 1.16).abs() < 1e-12);
        assert!(matches!(
            convert_currency(&eur, 1.16),
            Err(IngestError::AlreadyEur)
        ));
        let same = convert_currency(&clean, 1.0).unwrap();
        assert_eq!(same.values, clean.values);
    }

    #[test]
    fn converting_an_empty_series_is_vacuous() {
        let empty = CleanSeries {
            name: "uk".to_string(),
            unit: Unit::GbpPerMwh,
            days: Vec::new(),
            values: Vec::new(),
            flags: Vec::new(),
        };
        let out = convert_currency(&empty, 1.16).unwrap();
        assert!(out.values.is_empty());
        assert_eq!(out.unit, Unit::EurPerMwh);
    }

    #[test]
    fn alignment_keeps_only_common_days() {
        let a = parse_series(&csv_for(3, &[(2, 5), (2, 6)]), &schema()).unwrap();
        let b = parse_series(&csv_for(3, &[(3, 1), (3, 2)]), &schema()).unwrap();
        let (ca, _) = clean_series(&a).unwrap();
        let (cb, _) = clean_series(&b).unwrap();
        let aligned = align_days(&[ca, cb]);
        assert_eq!(aligned[0].days, aligned[1].days);
        assert_eq!(aligned[0].days.len(), 1);
        assert_eq!(aligned[0].len(), 24);
    }

    #[test]
    fn provenance_flags_are_exclusive_and_hours_multiple_of_24() {
        let raw = parse_series(&csv_for(5, &[(1, 3), (4, 10), (4, 11)]), &schema()).unwrap();
        let (clean, _) = clean_series(&raw).unwrap();
        assert_eq!(clean.len() % 24, 0);
        assert_eq!(clean.len(), clean.flags.len());
    }

    #[test]
    fn csv_round_trip_has_flag_column() {
        let raw = parse_series(&csv_for(1, &[]), &schema()).unwrap();
        let (clean, _) = clean_series(&raw).unwrap();
        let text = clean.to_csv();
        assert!(text.starts_with("timestamp,value,flag\n"));
        assert!(text.contains(",observed"));
    }
}
