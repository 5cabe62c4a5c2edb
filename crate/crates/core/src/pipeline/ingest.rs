//! Hourly weather CSV ingestion.
//!
//! Required header columns: `timestamp, wind_ms, ghi_kwm2, precip_mmh`.
//! Extra columns are ignored. Timestamps are RFC 3339 or
//! `YYYY-MM-DD HH:MM[:SS]` read as UTC.

use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const COLUMNS: [&str; 4] = ["timestamp", "wind_ms", "ghi_kwm2", "precip_mmh"];
/// Largest tolerated share of dropped rows.
pub const MAX_DROP_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherRecord {
    pub timestamp: DateTime<Utc>,
    pub wind_ms: f64,
    pub ghi_kwm2: f64,
    pub precip_mmh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    /// Last record before the gap.
    pub after: DateTime<Utc>,
    pub missing_hours: i64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rows_dropped: usize,
    /// 1-based file line numbers of dropped rows (first 100).
    pub dropped_lines: Vec<usize>,
    pub gaps: Vec<Gap>,
    pub rows_outside_filter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherDataset {
    pub source: String,
    pub records: Vec<WeatherRecord>,
    pub report: IngestReport,
}

/// Inclusive calendar-date window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DateFilter {
    pub from: Option<NaiveDate>,
    pub to: Option<NaiveDate>,
}

impl DateFilter {
    pub fn contains(&self, t: &DateTime<Utc>) -> bool {
        let d = t.date_naive();
        self.from.is_none_or(|f| d >= f) && self.to.is_none_or(|e| d <= e)
    }
}

pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    ["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M", "%Y-%m-%dT%H:%M"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .map(|n| n.and_utc())
}

fn field(rec: &csv::StringRecord, idx: usize) -> Option<f64> {
    let x: f64 = rec.get(idx)?.trim().parse().ok()?;
    (x.is_finite() && x >= 0.0).then_some(x)
}

impl WeatherDataset {
    pub fn from_records(source: impl Into<String>, records: Vec<WeatherRecord>) -> Self {
        WeatherDataset { source: source.into(), records, report: IngestReport::default() }
    }

    pub fn read<R: Read>(input: R, source: &str, filter: DateFilter) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(input);
        let header = rdr.headers().map_err(|e| Error::Format(format!("{source}: unreadable header: {e}")))?.clone();
        let idx: Vec<usize> = COLUMNS
            .iter()
            .map(|c| {
                header.iter().position(|h| h.trim() == *c).ok_or_else(|| {
                    Error::Format(format!("{source}: header lacks column `{c}` (need {})", COLUMNS.join(", ")))
                })
            })
            .collect::<Result<_>>()?;

        let mut report = IngestReport::default();
        let mut rows: Vec<(usize, WeatherRecord)> = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            report.rows_read += 1;
            let parsed = rec.ok().and_then(|r| {
                Some(WeatherRecord {
                    timestamp: parse_timestamp(r.get(idx[0])?)?,
                    wind_ms: field(&r, idx[1])?,
                    ghi_kwm2: field(&r, idx[2])?,
                    precip_mmh: field(&r, idx[3])?,
                })
            });
            match parsed {
                Some(r) => rows.push((line, r)),
                None => {
                    report.rows_dropped += 1;
                    if report.dropped_lines.len() < 100 {
                        report.dropped_lines.push(line);
                    }
                }
            }
        }
        if rows.is_empty() {
            return Err(Error::Quality(format!("{source}: no usable data rows")));
        }
        let frac = report.rows_dropped as f64 / report.rows_read as f64;
        if frac > MAX_DROP_FRACTION {
            return Err(Error::Quality(format!(
                "{source}: {} of {} rows dropped ({:.1}% > {:.0}%)",
                report.rows_dropped,
                report.rows_read,
                100.0 * frac,
                100.0 * MAX_DROP_FRACTION
            )));
        }

        for w in rows.windows(2) {
            let ((_, a), (line, b)) = (&w[0], &w[1]);
            let step = b.timestamp - a.timestamp;
            if step.num_seconds() == 0 {
                return Err(Error::Validation(format!("{source}: line {line}: duplicate timestamp {}", b.timestamp)));
            }
            if step.num_seconds() < 0 {
                return Err(Error::Validation(format!(
                    "{source}: line {line}: timestamp {} is earlier than the previous row",
                    b.timestamp
                )));
            }
            if step.num_seconds() % 3600 != 0 {
                return Err(Error::Validation(format!(
                    "{source}: line {line}: {} is not on the hourly grid of the previous row",
                    b.timestamp
                )));
            }
            if step.num_hours() > 1 {
                report.gaps.push(Gap { after: a.timestamp, missing_hours: step.num_hours() - 1 });
            }
        }

        let before = rows.len();
        let records: Vec<WeatherRecord> = rows.into_iter().map(|r| r.1).filter(|r| filter.contains(&r.timestamp)).collect();
        report.rows_outside_filter = before - records.len();
        if records.is_empty() {
            return Err(Error::Quality(format!("{source}: no rows inside the date filter")));
        }
        Ok(WeatherDataset { source: source.to_string(), records, report })
    }

    pub fn load(path: &Path, filter: DateFilter) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
        Self::read(std::io::BufReader::new(f), &path.display().to_string(), filter)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(COLUMNS)?;
        for r in &self.records {
            w.write_record([
                r.timestamp.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
                r.wind_ms.to_string(),
                r.ghi_kwm2.to_string(),
                r.precip_mmh.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("writing dataset csv", e))?;
        Ok(())
    }

    pub fn wind(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.wind_ms).collect()
    }

    pub fn hour_of_day(r: &WeatherRecord) -> usize {
        r.timestamp.hour() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(n: usize) -> String {
        let mut s = String::from("timestamp,wind_ms,ghi_kwm2,precip_mmh\n");
        for h in 0..n {
            s.push_str(&format!("2020-06-01T{h:02}:00:00Z,{},{},{}\n", 5.0 + h as f64, 0.1, 0.0));
        }
        s
    }

    #[test]
    fn clean_day() {
        let d = WeatherDataset::read(rows(24).as_bytes(), "t", DateFilter::default()).unwrap();
        assert_eq!(d.records.len(), 24);
        assert_eq!(d.report.rows_dropped, 0);
        assert!(d.report.gaps.is_empty());
        let mut out = Vec::new();
        d.write_csv(&mut out).unwrap();
        let again = WeatherDataset::read(out.as_slice(), "t", DateFilter::default()).unwrap();
        assert_eq!(again.records, d.records);
    }

    #[test]
    fn empty_and_bad_header() {
        let e = WeatherDataset::read(rows(0).as_bytes(), "t", DateFilter::default()).unwrap_err();
        assert!(matches!(e, Error::Quality(_)));
        let e = WeatherDataset::read("time,wind\n1,2\n".as_bytes(), "t", DateFilter::default()).unwrap_err();
        assert!(matches!(e, Error::Format(_)));
    }

    #[test]
    fn duplicate_names_the_line() {
        let mut s = rows(3);
        s.push_str("2020-06-01T02:00:00Z,1,0,0\n");
        match WeatherDataset::read(s.as_bytes(), "t", DateFilter::default()) {
            Err(Error::Validation(msg)) => assert!(msg.contains("line 5"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn drops_are_counted_and_capped() {
        let mut s = rows(24);
        s.push_str("2020-06-02T00:00:00Z,,0.1,0\n");
        s.push_str("2020-06-02T01:00:00Z,3,0.1,-1\n");
        s.push_str("2020-06-02 03:00,3,0.1,0.2\n");
        let d = WeatherDataset::read(s.as_bytes(), "t", DateFilter::default()).unwrap();
        assert_eq!(d.report.rows_dropped, 2);
        assert_eq!(d.report.dropped_lines, vec![26, 27]);
        assert_eq!(d.report.gaps, vec![Gap { after: parse_timestamp("2020-06-01T23:00:00Z").unwrap(), missing_hours: 3 }]);
        let mut bad = rows(5);
        bad.push_str("x,1,1,1\n");
        assert!(matches!(WeatherDataset::read(bad.as_bytes(), "t", DateFilter::default()), Err(Error::Quality(_))));
    }

    #[test]
    fn off_grid_timestamps_fail() {
        let s = "timestamp,wind_ms,ghi_kwm2,precip_mmh\n2020-01-01T00:00:00Z,1,0,0\n2020-01-01T00:30:00Z,1,0,0\n";
        assert!(matches!(WeatherDataset::read(s.as_bytes(), "t", DateFilter::default()), Err(Error::Validation(_))));
    }

    #[test]
    fn date_filter() {
        let mut s = rows(24);
        for h in 0..24 {
            s.push_str(&format!("2020-06-02T{h:02}:00:00Z,1,0,0\n"));
        }
        let day2 = NaiveDate::from_ymd_opt(2020, 6, 2);
        let d = WeatherDataset::read(s.as_bytes(), "t", DateFilter { from: day2, to: day2 }).unwrap();
        assert_eq!(d.records.len(), 24);
        assert_eq!(d.report.rows_outside_filter, 24);
    }
}
