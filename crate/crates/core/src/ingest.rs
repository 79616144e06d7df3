//! Raw log parsing and cleaning.
//!
//! Input is a comma-separated table with three columns: entity, access
//! status, timestamp. A header row is optional and detected by its status
//! and timestamp cells both failing to parse. Cleaning keeps only `Access`
//! rows and partitions them per entity, preserving file order within each
//! partition. Timestamps are never modified.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};

use chrono::NaiveDateTime;

use crate::error::{Error, Result};
use crate::time::{format_timestamp, parse_timestamp, TimestampFormat};

/// Whether a log row records an actual access.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessStatus {
    Access,
    NotAccess,
}

impl AccessStatus {
    /// Case-insensitive, whitespace-insensitive: `Access`, `NotAccess`,
    /// `not access` all parse.
    pub fn parse(text: &str) -> Option<AccessStatus> {
        let normalized: String =
            text.chars().filter(|c| !c.is_whitespace()).flat_map(char::to_lowercase).collect();
        match normalized.as_str() {
            "access" => Some(AccessStatus::Access),
            "notaccess" => Some(AccessStatus::NotAccess),
            _ => None,
        }
    }
}

impl fmt::Display for AccessStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AccessStatus::Access => "Access",
            AccessStatus::NotAccess => "NotAccess",
        })
    }
}

/// One raw log line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogRecord {
    pub entity: String,
    pub status: AccessStatus,
    pub timestamp: NaiveDateTime,
}

impl LogRecord {
    pub fn new(entity: impl Into<String>, status: AccessStatus, timestamp: NaiveDateTime) -> Self {
        LogRecord { entity: entity.into(), status, timestamp }
    }
}

fn record_from_row(
    row: &csv::StringRecord,
    format: TimestampFormat,
    line: u64,
) -> Result<LogRecord> {
    if row.len() != 3 {
        return Err(Error::Parse {
            line,
            message: format!("expected 3 columns (entity,status,timestamp), found {}", row.len()),
        });
    }
    let entity = row[0].trim();
    if entity.is_empty() {
        return Err(Error::Parse { line, message: "empty entity".into() });
    }
    let status = AccessStatus::parse(&row[1])
        .ok_or_else(|| Error::Parse { line, message: format!("unknown status {:?}", &row[1]) })?;
    let timestamp = parse_timestamp(&row[2], format)
        .ok_or_else(|| Error::Parse { line, message: format!("malformed timestamp {:?}", &row[2]) })?;
    Ok(LogRecord { entity: entity.to_string(), status, timestamp })
}

// A first row whose status and timestamp cells both fail to parse is a
// header ("entity,status,timestamp" or the like), not a data error.
fn looks_like_header(row: &csv::StringRecord, format: TimestampFormat) -> bool {
    row.get(1).is_some_and(|s| AccessStatus::parse(s).is_none())
        && row.get(2).is_some_and(|s| parse_timestamp(s, format).is_none())
}

/// Parse a raw log stream into records, one per non-empty line, in file order.
pub fn parse_log<R: Read>(reader: R, format: TimestampFormat) -> Result<Vec<LogRecord>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = Vec::new();
    for (index, row) in csv_reader.records().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if index == 0 && looks_like_header(&row, format) {
            continue;
        }
        records.push(record_from_row(&row, format, line)?);
    }
    Ok(records)
}

/// Serialize records with a header row, in the canonical ISO timestamp form.
/// `parse_log` reads the result back unchanged.
pub fn write_records<W: Write>(writer: W, records: &[LogRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["entity", "status", "timestamp"]).map_err(csv_io_error)?;
    for record in records {
        out.write_record([
            record.entity.as_str(),
            &record.status.to_string(),
            &format_timestamp(record.timestamp),
        ])
        .map_err(csv_io_error)?;
    }
    out.flush()?;
    Ok(())
}

pub(crate) fn csv_io_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse { line: 0, message: format!("{other:?}") },
    }
}

/// Data cleaning: drop non-Access rows and partition by entity.
/// Within each partition the original record order is preserved.
pub fn clean(records: Vec<LogRecord>) -> BTreeMap<String, Vec<LogRecord>> {
    let mut partitions: BTreeMap<String, Vec<LogRecord>> = BTreeMap::new();
    for record in records {
        if record.status == AccessStatus::Access {
            partitions.entry(record.entity.clone()).or_default().push(record);
        }
    }
    partitions
}
