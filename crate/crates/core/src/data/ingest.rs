//! CSV ingestion with a per-file metadata sidecar.
//!
//! Input files carry a header row, a `timestamp` column (ISO-8601 date, date
//! with time, or `YYYY-MM` for monthly files) and one or more named value
//! columns. The sidecar `<file>.meta` is a TOML document:
//!
//! ```toml
//! frequency = "daily"
//!
//! [columns.temp_avg]
//! unit = "C"
//! kind = "climate"
//! monthly = "mean"
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TimedRecord {
    pub timestamp: NaiveDateTime,
    pub value: f64,
    pub series_id: String,
}

/// Decimal separator used in numeric cells.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecimalLocale {
    #[default]
    Period,
    /// Comma decimals with optional `.` thousands grouping (`7.566.440,00`).
    Comma,
}

impl DecimalLocale {
    pub fn parse_number(self, raw: &str) -> Option<f64> {
        let raw = raw.trim();
        if raw.is_empty() {
            return None;
        }
        let value = match self {
            DecimalLocale::Period => raw.parse::<f64>().ok()?,
            DecimalLocale::Comma => raw.replace('.', "").replace(',', ".").parse::<f64>().ok()?,
        };
        value.is_finite().then_some(value)
    }

    /// Shortest representation that parses back to the same `f64`.
    pub fn format_number(self, value: f64) -> String {
        let s = value.to_string();
        match self {
            DecimalLocale::Period => s,
            DecimalLocale::Comma => s.replace('.', ","),
        }
    }

    /// Field delimiter used when writing files in this locale.
    pub fn delimiter(self) -> u8 {
        match self {
            DecimalLocale::Period => b',',
            DecimalLocale::Comma => b';',
        }
    }
}

impl std::str::FromStr for DecimalLocale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "period" | "dot" | "." => Ok(DecimalLocale::Period),
            "comma" | "," | "pt-br" => Ok(DecimalLocale::Comma),
            other => Err(Error::invalid(format!("unknown decimal locale `{other}`"))),
        }
    }
}

/// Which columns of a CSV file to read.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSchema {
    pub timestamp_column: String,
    pub value_columns: Vec<String>,
}

impl CsvSchema {
    pub fn new(timestamp_column: impl Into<String>, value_columns: Vec<String>) -> Self {
        Self {
            timestamp_column: timestamp_column.into(),
            value_columns,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frequency {
    Hourly,
    Daily,
    Monthly,
}

/// Role of a column declared in a sidecar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Target,
    Activity,
    Climate,
}

/// How daily values combine into a month.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MonthlyAggregation {
    /// Additive quantities: hours, precipitation, consumption.
    #[default]
    Sum,
    /// Intensities such as temperature.
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    #[serde(default)]
    pub unit: String,
    pub kind: ColumnKind,
    #[serde(default)]
    pub monthly: MonthlyAggregation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub frequency: Frequency,
    pub columns: BTreeMap<String, ColumnMeta>,
}

impl Sidecar {
    pub fn path_for(data_file: &Path) -> PathBuf {
        let mut name = data_file.as_os_str().to_os_string();
        name.push(".meta");
        PathBuf::from(name)
    }

    pub fn load_for(data_file: &Path) -> Result<Self> {
        let path = Self::path_for(data_file);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("sidecar serializes")
    }
}

fn parse_timestamp(raw: &str) -> Option<NaiveDateTime> {
    let raw = raw.trim();
    const DATETIME: [&str; 4] = [
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%d %H:%M",
    ];
    for fmt in DATETIME {
        if let Ok(ts) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(ts);
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
        return d.and_hms_opt(0, 0, 0);
    }
    // monthly files: YYYY-MM
    NaiveDate::parse_from_str(&format!("{raw}-01"), "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
}

/// Reads records from a CSV file on disk.
pub fn load_csv(path: &Path, schema: &CsvSchema, locale: DecimalLocale) -> Result<Vec<TimedRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, schema, locale).map_err(|e| match e {
        Error::Parse { line, message, .. } => Error::Parse {
            context: Some(path.display().to_string()),
            line,
            message,
        },
        other => other,
    })
}

/// Parses CSV text. With the comma locale the field delimiter is `;` when the
/// header contains one; otherwise `,` and comma-decimal cells must be quoted.
pub fn parse_csv(text: &str, schema: &CsvSchema, locale: DecimalLocale) -> Result<Vec<TimedRecord>> {
    if schema.value_columns.is_empty() {
        return Err(Error::invalid("schema names no value columns"));
    }
    let header_line = text.lines().next().unwrap_or("");
    let delimiter = match locale {
        DecimalLocale::Comma if header_line.contains(';') => b';',
        DecimalLocale::Period if header_line.contains(';') && !header_line.contains(',') => b';',
        _ => b',',
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            context: None,
            line: 1,
            message: format!("missing column `{name}`"),
        })
    };
    let ts_idx = find(&schema.timestamp_column)?;
    let value_idx = schema
        .value_columns
        .iter()
        .map(|c| find(c))
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Parse {
            context: None,
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let malformed = |message: String| Error::Parse {
            context: None,
            line,
            message,
        };
        if row.len() != headers.len() {
            return Err(malformed(format!(
                "expected {} fields, found {}",
                headers.len(),
                row.len()
            )));
        }
        let ts_raw = &row[ts_idx];
        let timestamp = parse_timestamp(ts_raw)
            .ok_or_else(|| malformed(format!("bad timestamp `{ts_raw}`")))?;
        for (name, &idx) in schema.value_columns.iter().zip(&value_idx) {
            let raw = &row[idx];
            let value = locale
                .parse_number(raw)
                .ok_or_else(|| malformed(format!("bad value `{raw}` in column `{name}`")))?;
            records.push(TimedRecord {
                timestamp,
                value,
                series_id: name.clone(),
            });
        }
    }
    if records.is_empty() {
        return Err(Error::NoRecords);
    }

    let column_rank = |id: &str| schema.value_columns.iter().position(|c| c == id);
    records.sort_by(|a, b| {
        a.timestamp
            .cmp(&b.timestamp)
            .then_with(|| column_rank(&a.series_id).cmp(&column_rank(&b.series_id)))
    });
    let mut seen = HashSet::new();
    for r in &records {
        if !seen.insert((r.series_id.as_str(), r.timestamp)) {
            return Err(Error::DuplicateTimestamp {
                series: r.series_id.clone(),
                timestamp: r.timestamp.format("%Y-%m-%dT%H:%M").to_string(),
            });
        }
    }
    Ok(records)
}

/// Writes a single-column-per-series CSV in `locale`, matching what
/// [`parse_csv`] reads back.
pub fn write_csv<W: std::io::Write>(
    out: W,
    timestamp_header: &str,
    columns: &[&str],
    rows: &[(String, Vec<f64>)],
    locale: DecimalLocale,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(locale.delimiter())
        .from_writer(out);
    let mut header = vec![timestamp_header];
    header.extend_from_slice(columns);
    w.write_record(&header)?;
    for (ts, values) in rows {
        let mut rec = vec![ts.clone()];
        rec.extend(values.iter().map(|v| locale.format_number(*v)));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn schema(cols: &[&str]) -> CsvSchema {
        CsvSchema::new("timestamp", cols.iter().map(|c| c.to_string()).collect())
    }

    #[test]
    fn comma_locale_with_semicolon_delimiter() {
        let text = "timestamp;value\n2020-03-01T10:00;2,5\n";
        let recs = parse_csv(text, &schema(&["value"]), DecimalLocale::Comma).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].value, 2.5);
    }

    #[test]
    fn comma_locale_with_quoted_cells() {
        let text = "timestamp,value\n2020-03-01T10:00,\"2,5\"\n";
        let recs = parse_csv(text, &schema(&["value"]), DecimalLocale::Comma).unwrap();
        assert_eq!(recs[0].value, 2.5);
    }

    #[test]
    fn thousands_grouping_in_comma_locale() {
        assert_eq!(DecimalLocale::Comma.parse_number("7.566.440,00"), Some(7_566_440.0));
        assert_eq!(DecimalLocale::Period.parse_number("2,5"), None);
    }

    #[test]
    fn empty_file_has_no_records() {
        let err = parse_csv("timestamp,value\n", &schema(&["value"]), DecimalLocale::Period);
        assert!(matches!(err, Err(Error::NoRecords)));
        assert_eq!(err.unwrap_err().to_string(), "no records");
    }

    #[test]
    fn duplicate_timestamp_rejected() {
        let text = "timestamp,value\n2020-03-01,1\n2020-03-01,2\n";
        let err = parse_csv(text, &schema(&["value"]), DecimalLocale::Period).unwrap_err();
        assert!(matches!(err, Error::DuplicateTimestamp { .. }), "{err}");
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = "timestamp,value\n2020-03-01,1\n2020-03-02,abc\n";
        let err = parse_csv(text, &schema(&["value"]), DecimalLocale::Period).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn records_sorted_by_time() {
        let text = "timestamp,a,b\n2020-03-02,1,2\n2020-03-01,3,4\n";
        let recs = parse_csv(text, &schema(&["a", "b"]), DecimalLocale::Period).unwrap();
        let ids: Vec<_> = recs.iter().map(|r| (r.series_id.as_str(), r.value)).collect();
        assert_eq!(ids, vec![("a", 3.0), ("b", 4.0), ("a", 1.0), ("b", 2.0)]);
    }

    #[test]
    fn timestamp_forms() {
        for raw in ["2020-03-01", "2020-03-01T00:00", "2020-03-01 00:00:00", "2020-03"] {
            let ts = parse_timestamp(raw).unwrap();
            assert_eq!(ts.format("%Y-%m-%d %H:%M").to_string(), "2020-03-01 00:00");
        }
        assert!(parse_timestamp("03/01/2020").is_none());
    }

    #[test]
    fn write_then_parse() {
        let mut buf = Vec::new();
        let rows = vec![("2020-01-01".to_string(), vec![1.25, -3.0])];
        write_csv(&mut buf, "timestamp", &["a", "b"], &rows, DecimalLocale::Comma).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "timestamp;a;b\n2020-01-01;1,25;-3\n");
        let recs = parse_csv(&text, &schema(&["a", "b"]), DecimalLocale::Comma).unwrap();
        assert_eq!(recs[0].value, 1.25);
    }

    proptest! {
        #[test]
        fn locale_round_trip(v in -1e9f64..1e9, comma in any::<bool>()) {
            let locale = if comma { DecimalLocale::Comma } else { DecimalLocale::Period };
            let back = locale.parse_number(&locale.format_number(v)).unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }
}
