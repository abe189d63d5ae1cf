//! Raw observation parsing and the complete-day filter.
//!
//! Observation files are headed CSV with a timestamp column and a wind-speed
//! column. Only UTC days whose every observation is present, at the expected
//! cadence, survive [`filter_complete_days`].

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::power_model::PowerCurve;
use crate::types::WindSeries;

const SECONDS_PER_DAY: u64 = 86_400;

/// One observation row; `speed` is `None` for a missing value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawRecord {
    pub timestamp: DateTime<Utc>,
    pub speed: Option<f64>,
}

/// Column mapping for observation files.
#[derive(Debug, Clone)]
pub struct CsvConfig {
    /// Timestamp column name; `None` selects the first column.
    pub time_column: Option<String>,
    /// Speed column name; `None` selects the second column.
    pub speed_column: Option<String>,
    /// chrono format string; `None` accepts RFC 3339 or `%Y-%m-%d %H:%M:%S` (UTC).
    pub time_format: Option<String>,
    pub missing_sentinels: Vec<String>,
}

impl Default for CsvConfig {
    fn default() -> Self {
        CsvConfig {
            time_column: None,
            speed_column: None,
            time_format: None,
            missing_sentinels: vec![String::new(), "NaN".into(), "-999".into()],
        }
    }
}

impl CsvConfig {
    fn is_missing(&self, field: &str) -> bool {
        let field = field.trim();
        self.missing_sentinels.iter().any(|s| {
            let s = s.trim();
            s == field
                || matches!(
                    (s.parse::<f64>(), field.parse::<f64>()),
                    (Ok(a), Ok(b)) if a == b
                )
        })
    }
}

pub fn parse_csv(path: impl AsRef<Path>, config: &CsvConfig) -> Result<Vec<RawRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv_reader(file, config)
}

pub fn parse_csv_reader<R: Read>(reader: R, config: &CsvConfig) -> Result<Vec<RawRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let locate = |name: &Option<String>, default: usize| -> Result<usize> {
        match name {
            Some(n) => headers
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| Error::Parse {
                    line: 1,
                    message: format!("column '{n}' not found in header"),
                }),
            None if default < headers.len() => Ok(default),
            None => Err(Error::Parse {
                line: 1,
                message: format!("header has {} columns, need at least 2", headers.len()),
            }),
        }
    };
    let time_idx = locate(&config.time_column, 0)?;
    let speed_idx = locate(&config.speed_column, 1)?;

    let mut out: Vec<RawRecord> = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let time_field = row.get(time_idx).ok_or_else(|| Error::Parse {
            line,
            message: "missing timestamp field".into(),
        })?;
        let timestamp = parse_timestamp(time_field, config.time_format.as_deref())
            .ok_or_else(|| Error::Parse {
                line,
                message: format!("cannot parse timestamp '{time_field}'"),
            })?;
        let speed_field = row.get(speed_idx).unwrap_or("");
        let speed = if config.is_missing(speed_field) {
            None
        } else {
            let v: f64 = speed_field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("cannot parse wind speed '{speed_field}'"),
            })?;
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Parse {
                    line,
                    message: format!("wind speed {v} is not a finite non-negative number"),
                });
            }
            Some(v)
        };
        if let Some(prev) = out.last() {
            if timestamp <= prev.timestamp {
                return Err(Error::NonMonotonicTimestamp { line });
            }
        }
        out.push(RawRecord { timestamp, speed });
    }
    Ok(out)
}

fn parse_timestamp(field: &str, format: Option<&str>) -> Option<DateTime<Utc>> {
    let field = field.trim();
    match format {
        Some(fmt) => DateTime::parse_from_str(field, fmt)
            .map(|t| t.with_timezone(&Utc))
            .ok()
            .or_else(|| {
                NaiveDateTime::parse_from_str(field, fmt)
                    .ok()
                    .map(|n| n.and_utc())
            }),
        None => DateTime::parse_from_rfc3339(field)
            .map(|t| t.with_timezone(&Utc))
            .ok()
            .or_else(|| {
                ["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M"]
                    .iter()
                    .find_map(|f| NaiveDateTime::parse_from_str(field, f).ok())
                    .map(|n| n.and_utc())
            }),
    }
}

/// Writes records in the default observation layout; missing speeds are
/// written as `NaN`.
pub fn write_records_csv<W: Write>(writer: W, records: &[RawRecord]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["timestamp", "wind_speed_mps"])?;
    for r in records {
        let speed = r.speed.map_or_else(|| "NaN".to_string(), |v| v.to_string());
        w.write_record([
            r.timestamp.to_rfc3339_opts(chrono::SecondsFormat::AutoSi, true),
            speed,
        ])?;
    }
    w.flush()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum ExclusionReason {
    /// At least one observation of the day is missing.
    MissingValues { missing: usize },
    /// The day has the wrong number of rows.
    IncompleteCount { found: usize, expected: usize },
    /// Right count, but consecutive timestamps are not one step apart.
    CadenceViolation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExcludedDay {
    pub date: NaiveDate,
    #[serde(flatten)]
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ExclusionSummary {
    pub retained_days: Vec<NaiveDate>,
    pub excluded_days: Vec<ExcludedDay>,
}

/// Keeps only UTC days with exactly `86400 / expected_step_seconds`
/// non-missing records spaced one step apart, concatenated in time order.
pub fn filter_complete_days(
    records: &[RawRecord],
    expected_step_seconds: u64,
) -> Result<(WindSeries, ExclusionSummary)> {
    if expected_step_seconds == 0 || SECONDS_PER_DAY % expected_step_seconds != 0 {
        return Err(Error::InvalidSpec(format!(
            "step of {expected_step_seconds} s does not divide a day"
        )));
    }
    let per_day = (SECONDS_PER_DAY / expected_step_seconds) as usize;

    let mut days: BTreeMap<NaiveDate, Vec<RawRecord>> = BTreeMap::new();
    for r in records {
        days.entry(r.timestamp.date_naive()).or_default().push(*r);
    }

    let mut summary = ExclusionSummary::default();
    let mut values = Vec::new();
    let mut start_time = None;
    for (date, mut rows) in days {
        rows.sort_by_key(|r| r.timestamp);
        let missing = rows.iter().filter(|r| r.speed.is_none()).count();
        let reason = if missing > 0 {
            Some(ExclusionReason::MissingValues { missing })
        } else if rows.len() != per_day {
            Some(ExclusionReason::IncompleteCount {
                found: rows.len(),
                expected: per_day,
            })
        } else if rows
            .windows(2)
            .any(|w| (w[1].timestamp - w[0].timestamp).num_seconds() != expected_step_seconds as i64)
        {
            Some(ExclusionReason::CadenceViolation)
        } else {
            None
        };
        match reason {
            Some(reason) => summary.excluded_days.push(ExcludedDay { date, reason }),
            None => {
                start_time.get_or_insert(rows[0].timestamp);
                values.extend(rows.iter().filter_map(|r| r.speed));
                summary.retained_days.push(date);
            }
        }
    }

    let start_time = start_time.ok_or(Error::NoCompleteDays)?;
    let series = WindSeries::raw(start_time, expected_step_seconds, values)?;
    Ok((series, summary))
}

/// Loads a two-column `wind_speed_mps,power_kw` curve.
pub fn load_power_curve(path: impl AsRef<Path>) -> Result<PowerCurve> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_power_curve(file)
}

pub fn read_power_curve<R: Read>(reader: R) -> Result<PowerCurve> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if headers.len() != 2 || &headers[0] != "wind_speed_mps" || &headers[1] != "power_kw" {
        return Err(Error::Parse {
            line: 1,
            message: "power curve header must be 'wind_speed_mps,power_kw'".into(),
        });
    }
    let mut points = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let num = |i: usize| -> Result<f64> {
            row[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    line,
                    message: format!("bad number '{}'", &row[i]),
                })
        };
        points.push((num(0)?, num(1)?));
    }
    PowerCurve::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{Duration, TimeZone};

    fn parse(text: &str) -> Result<Vec<RawRecord>> {
        parse_csv_reader(text.as_bytes(), &CsvConfig::default())
    }

    fn day_records(date: (i32, u32, u32), step: u64) -> Vec<RawRecord> {
        let start = Utc.with_ymd_and_hms(date.0, date.1, date.2, 0, 0, 0).unwrap();
        (0..SECONDS_PER_DAY / step)
            .map(|k| RawRecord {
                timestamp: start + Duration::seconds((k * step) as i64),
                speed: Some(1.0 + k as f64 * 0.01),
            })
            .collect()
    }

    #[test]
    fn parses_value_and_sentinels() {
        let recs = parse(
            "time,speed\n2016-01-01T00:00:00Z,5.2\n2016-01-01T00:10:00Z,-999\n\
             2016-01-01T00:20:00Z,\n2016-01-01T00:30:00Z,NaN\n2016-01-01T00:40:00Z,-999.0\n",
        )
        .unwrap();
        assert_eq!(recs.len(), 5);
        assert_eq!(recs[0].speed, Some(5.2));
        assert!(recs[1..].iter().all(|r| r.speed.is_none()));
    }

    #[test]
    fn out_of_order_rejected_with_line() {
        let err = parse("time,speed\n2016-01-01T00:10:00Z,1\n2016-01-01T00:00:00Z,2\n").unwrap_err();
        assert!(matches!(err, Error::NonMonotonicTimestamp { line: 3 }), "{err:?}");
        let dup = parse("time,speed\n2016-01-01T00:10:00Z,1\n2016-01-01T00:10:00Z,2\n").unwrap_err();
        assert!(matches!(dup, Error::NonMonotonicTimestamp { .. }));
    }

    #[test]
    fn bad_fields_are_parse_errors() {
        assert!(matches!(
            parse("time,speed\nyesterday,1\n").unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
        assert!(matches!(
            parse("time,speed\n2016-01-01T00:00:00Z,abc\n").unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
        assert!(matches!(
            parse("time,speed\n2016-01-01T00:00:00Z,-3\n").unwrap_err(),
            Error::Parse { .. }
        ));
    }

    #[test]
    fn named_columns_and_custom_format() {
        let cfg = CsvConfig {
            time_column: Some("when".into()),
            speed_column: Some("ws".into()),
            time_format: Some("%d/%m/%Y %H:%M".into()),
            ..CsvConfig::default()
        };
        let recs = parse_csv_reader("ws,x,when\n3.5,0,02/01/2016 10:20\n".as_bytes(), &cfg).unwrap();
        assert_eq!(recs[0].speed, Some(3.5));
        assert_eq!(
            recs[0].timestamp,
            Utc.with_ymd_and_hms(2016, 1, 2, 10, 20, 0).unwrap()
        );
        let missing = CsvConfig {
            speed_column: Some("nope".into()),
            ..CsvConfig::default()
        };
        assert!(parse_csv_reader("a,b\n".as_bytes(), &missing).is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = parse_csv("/definitely/not/here.csv", &CsvConfig::default()).unwrap_err();
        assert!(err.is_io());
        assert!(err.to_string().contains("/definitely/not/here.csv"));
    }

    #[test]
    fn two_complete_days_kept() {
        let mut recs = day_records((2016, 1, 1), 600);
        recs.extend(day_records((2016, 1, 2), 600));
        let (series, summary) = filter_complete_days(&recs, 600).unwrap();
        assert_eq!(series.len(), 288);
        assert!(summary.excluded_days.is_empty());
        assert_eq!(summary.retained_days.len(), 2);
    }

    #[test]
    fn day_with_missing_value_dropped() {
        let mut recs = day_records((2016, 1, 1), 600);
        let mut day2 = day_records((2016, 1, 2), 600);
        day2[10].speed = None;
        recs.extend(day2);
        let (series, summary) = filter_complete_days(&recs, 600).unwrap();
        assert_eq!(series.len(), 144);
        assert_eq!(
            summary.excluded_days,
            vec![ExcludedDay {
                date: NaiveDate::from_ymd_opt(2016, 1, 2).unwrap(),
                reason: ExclusionReason::MissingValues { missing: 1 },
            }]
        );
    }

    #[test]
    fn day_with_dropped_row_or_bad_cadence_excluded() {
        let mut short = day_records((2016, 1, 1), 600);
        short.remove(50);
        let mut shifted = day_records((2016, 1, 2), 600);
        shifted[3].timestamp += Duration::seconds(60);
        let mut recs = short;
        recs.extend(shifted);
        recs.extend(day_records((2016, 1, 3), 600));
        let (series, summary) = filter_complete_days(&recs, 600).unwrap();
        assert_eq!(series.len(), 144);
        assert_eq!(
            series.start_time(),
            Utc.with_ymd_and_hms(2016, 1, 3, 0, 0, 0).unwrap()
        );
        let reasons: Vec<_> = summary.excluded_days.iter().map(|d| d.reason.clone()).collect();
        assert_eq!(
            reasons,
            vec![
                ExclusionReason::IncompleteCount {
                    found: 143,
                    expected: 144
                },
                ExclusionReason::CadenceViolation
            ]
        );
    }

    #[test]
    fn no_complete_days_is_error() {
        let mut recs = day_records((2016, 1, 1), 600);
        recs.pop();
        assert!(matches!(
            filter_complete_days(&recs, 600).unwrap_err(),
            Error::NoCompleteDays
        ));
        assert!(matches!(
            filter_complete_days(&[], 600).unwrap_err(),
            Error::NoCompleteDays
        ));
        assert!(filter_complete_days(&recs, 7 * 60 + 1).is_err());
    }

    #[test]
    fn power_curve_files() {
        let ok = read_power_curve("wind_speed_mps,power_kw\n0,0\n10,1000\n25,1000\n".as_bytes()).unwrap();
        assert_eq!(ok.points().len(), 3);
        assert!(matches!(
            read_power_curve("wind_speed_mps,power_kw\n10,1000\n5,0\n".as_bytes()).unwrap_err(),
            Error::NonMonotonicSpeeds { .. }
        ));
        assert!(matches!(
            read_power_curve("wind_speed_mps,power_kw\n0,-1\n".as_bytes()).unwrap_err(),
            Error::NegativePower { .. }
        ));
        assert!(matches!(
            read_power_curve("wind_speed_mps,power_kw\n0,1\n".as_bytes()).unwrap_err(),
            Error::FewerThanTwoPoints(1)
        ));
        assert!(read_power_curve("speed,kw\n0,0\n1,1\n".as_bytes()).is_err());
    }
}
