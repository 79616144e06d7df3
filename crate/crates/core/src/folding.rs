//! Folding cleaned records over a periodicity.
//!
//! Folding maps every timestamp of one entity to its offset within the
//! period and counts accesses per offset. The period count N is the number
//! of periods the data collection spans, computed inclusively from the
//! earliest to the latest timestamp; an explicit override replaces it.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};

use chrono::Datelike;

use crate::error::{Error, Result};
use crate::ingest::{csv_io_error, AccessStatus, LogRecord};
use crate::time::{period_length, time_point, Granularity, Periodicity, TimePoint};

/// One folded offset and how many accesses landed on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FoldedPoint {
    pub time_point: TimePoint,
    pub access_count: u32,
}

/// A single entity's folded access counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldedSeries {
    entity: String,
    periodicity: Periodicity,
    granularity: Granularity,
    points: Vec<FoldedPoint>,
    period_count: u32,
}

impl FoldedSeries {
    /// Build a series, checking the structural invariants: strictly
    /// increasing in-range time points, every count at least 1, N positive.
    pub fn new(
        entity: impl Into<String>,
        periodicity: Periodicity,
        granularity: Granularity,
        points: Vec<FoldedPoint>,
        period_count: u32,
    ) -> Result<FoldedSeries> {
        if period_count == 0 {
            return Err(Error::Config("period count must be positive".into()));
        }
        let limit = period_length(periodicity, granularity);
        for (i, point) in points.iter().enumerate() {
            if point.access_count == 0 {
                return Err(Error::Config(format!(
                    "zero access count at time point {}",
                    point.time_point
                )));
            }
            if point.time_point >= limit {
                return Err(Error::Config(format!(
                    "time point {} outside the period (length {limit})",
                    point.time_point
                )));
            }
            if i > 0 && points[i - 1].time_point >= point.time_point {
                return Err(Error::Config(format!(
                    "time points not strictly increasing at {}",
                    point.time_point
                )));
            }
        }
        Ok(FoldedSeries { entity: entity.into(), periodicity, granularity, points, period_count })
    }

    /// Convenience constructor from `(time_point, access_count)` pairs.
    pub fn from_pairs(
        entity: impl Into<String>,
        periodicity: Periodicity,
        granularity: Granularity,
        pairs: &[(TimePoint, u32)],
        period_count: u32,
    ) -> Result<FoldedSeries> {
        let points = pairs
            .iter()
            .map(|&(time_point, access_count)| FoldedPoint { time_point, access_count })
            .collect();
        FoldedSeries::new(entity, periodicity, granularity, points, period_count)
    }

    pub fn entity(&self) -> &str {
        &self.entity
    }

    pub fn periodicity(&self) -> Periodicity {
        self.periodicity
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn points(&self) -> &[FoldedPoint] {
        &self.points
    }

    /// N: how many periods the collection spans.
    pub fn period_count(&self) -> u32 {
        self.period_count
    }

    pub fn total_access_count(&self) -> u64 {
        self.points.iter().map(|p| u64::from(p.access_count)).sum()
    }
}

/// Inclusive count of periods between the earliest and latest timestamp.
/// Weekly periods are Monday-anchored calendar weeks.
pub fn period_count(records: &[LogRecord], periodicity: Periodicity) -> Result<u32> {
    let mut dates = records.iter().map(|r| r.timestamp.date());
    let first = dates.next().ok_or(Error::EmptyFold)?;
    let (mut min, mut max) = (first, first);
    for date in dates {
        min = min.min(date);
        max = max.max(date);
    }
    let days = match periodicity {
        Periodicity::Daily => (max - min).num_days(),
        Periodicity::Weekly => {
            let week_start = |d: chrono::NaiveDate| {
                d - chrono::Duration::days(i64::from(d.weekday().num_days_from_monday()))
            };
            (week_start(max) - week_start(min)).num_days() / 7
        }
    };
    Ok(days as u32 + 1)
}

/// Fold one entity's cleaned records into per-offset access counts.
///
/// All records must belong to a single entity and have `Access` status.
/// `n_override` replaces the computed period count; it is required when
/// `records` is empty (the result is then an empty series).
pub fn fold(
    records: &[LogRecord],
    periodicity: Periodicity,
    granularity: Granularity,
    n_override: Option<u32>,
) -> Result<FoldedSeries> {
    let entity = records.first().map(|r| r.entity.clone()).unwrap_or_default();
    for record in records {
        if record.entity != entity {
            return Err(Error::MixedEntities { first: entity, second: record.entity.clone() });
        }
        if record.status != AccessStatus::Access {
            return Err(Error::NotCleaned { entity: record.entity.clone() });
        }
    }
    let n = match n_override {
        Some(0) => return Err(Error::Config("period count override must be positive".into())),
        Some(n) => n,
        None => period_count(records, periodicity)?,
    };
    let mut counts: BTreeMap<TimePoint, u32> = BTreeMap::new();
    for record in records {
        *counts.entry(time_point(record.timestamp, periodicity, granularity)).or_insert(0) += 1;
    }
    let points = counts
        .into_iter()
        .map(|(time_point, access_count)| FoldedPoint { time_point, access_count })
        .collect();
    FoldedSeries::new(entity, periodicity, granularity, points, n)
}

/// A folded file: the shared fold parameters plus per-entity series,
/// sorted by entity name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldedTable {
    periodicity: Periodicity,
    granularity: Granularity,
    period_count: u32,
    series: Vec<FoldedSeries>,
}

impl FoldedTable {
    /// Build a table, checking that every series carries the table's fold
    /// parameters. Series are reordered by entity name; an empty table is
    /// legal.
    pub fn new(
        periodicity: Periodicity,
        granularity: Granularity,
        period_count: u32,
        mut series: Vec<FoldedSeries>,
    ) -> Result<FoldedTable> {
        if period_count == 0 {
            return Err(Error::Config("period count must be positive".into()));
        }
        for s in &series {
            if (s.periodicity, s.granularity, s.period_count)
                != (periodicity, granularity, period_count)
            {
                return Err(Error::Config(format!(
                    "series for {:?} does not match the table's fold parameters",
                    s.entity
                )));
            }
        }
        series.sort_by(|a, b| a.entity.cmp(&b.entity));
        Ok(FoldedTable { periodicity, granularity, period_count, series })
    }

    pub fn periodicity(&self) -> Periodicity {
        self.periodicity
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn period_count(&self) -> u32 {
        self.period_count
    }

    pub fn series(&self) -> &[FoldedSeries] {
        &self.series
    }
}

/// Write a folded table as CSV: a `#` metadata line with periodicity,
/// granularity and N, then `entity,timePoint,accessCount` rows sorted by
/// (entity, timePoint).
pub fn write_folded<W: Write>(mut writer: W, table: &FoldedTable) -> Result<()> {
    writeln!(
        writer,
        "# periodicity={} granularity={} n={}",
        table.periodicity, table.granularity, table.period_count
    )?;
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["entity", "timePoint", "accessCount"]).map_err(csv_io_error)?;
    for s in &table.series {
        for point in &s.points {
            out.write_record([
                s.entity.as_str(),
                &point.time_point.to_string(),
                &point.access_count.to_string(),
            ])
            .map_err(csv_io_error)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Read a folded CSV back into a table.
pub fn read_folded<R: Read>(reader: R) -> Result<FoldedTable> {
    let mut reader = BufReader::new(reader);
    let mut meta_line = String::new();
    reader.read_line(&mut meta_line)?;
    let (periodicity, granularity, n) = parse_meta_line(&meta_line)?;

    let mut csv_reader =
        csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let mut per_entity: BTreeMap<String, Vec<FoldedPoint>> = BTreeMap::new();
    for row in csv_reader.records() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != 3 {
            return Err(Error::Parse { line, message: format!("expected 3 columns, found {}", row.len()) });
        }
        let parse_num = |s: &str, what: &str| {
            s.parse::<u32>()
                .map_err(|_| Error::Parse { line, message: format!("bad {what} {s:?}") })
        };
        let time_point = parse_num(&row[1], "time point")?;
        let access_count = parse_num(&row[2], "access count")?;
        per_entity.entry(row[0].to_string()).or_default().push(FoldedPoint { time_point, access_count });
    }
    let series = per_entity
        .into_iter()
        .map(|(entity, points)| FoldedSeries::new(entity, periodicity, granularity, points, n))
        .collect::<Result<Vec<_>>>()?;
    FoldedTable::new(periodicity, granularity, n, series)
}

fn parse_meta_line(line: &str) -> Result<(Periodicity, Granularity, u32)> {
    let bad = |msg: &str| Error::Parse { line: 1, message: msg.to_string() };
    let body = line
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| bad("missing '# periodicity=... granularity=... n=...' metadata line"))?;
    let mut periodicity = None;
    let mut granularity = None;
    let mut n = None;
    for pair in body.split_whitespace() {
        let (key, value) =
            pair.split_once('=').ok_or_else(|| bad(&format!("bad metadata entry {pair:?}")))?;
        match key {
            "periodicity" => periodicity = Some(value.parse::<Periodicity>()?),
            "granularity" => granularity = Some(value.parse::<Granularity>()?),
            "n" => {
                n = Some(value.parse::<u32>().map_err(|_| bad(&format!("bad n {value:?}")))?)
            }
            other => return Err(bad(&format!("unknown metadata key {other:?}"))),
        }
    }
    match (periodicity, granularity, n) {
        (Some(p), Some(g), Some(n)) => Ok((p, g, n)),
        _ => Err(bad("metadata line must set periodicity, granularity and n")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{clean, parse_log};
    use crate::time::TimestampFormat;

    const RAW_LOG: &str = include_str!("testdata/raw_log.csv");

    fn sample_partitions() -> BTreeMap<String, Vec<LogRecord>> {
        clean(parse_log(RAW_LOG.as_bytes(), TimestampFormat::Auto).unwrap())
    }

    #[test]
    fn folds_the_first_sample_entity() {
        let partitions = sample_partitions();
        let series =
            fold(&partitions["Citeseer.com"], Periodicity::Daily, Granularity::Minute, Some(7))
                .unwrap();
        let pairs: Vec<(u32, u32)> =
            series.points().iter().map(|p| (p.time_point, p.access_count)).collect();
        assert_eq!(pairs, vec![(845, 3), (850, 3), (880, 2)]);
        assert_eq!(series.period_count(), 7);
    }

    #[test]
    fn folds_the_second_sample_entity() {
        let partitions = sample_partitions();
        let series =
            fold(&partitions["Rgtu.net"], Periodicity::Daily, Granularity::Minute, Some(7))
                .unwrap();
        let pairs: Vec<(u32, u32)> =
            series.points().iter().map(|p| (p.time_point, p.access_count)).collect();
        assert_eq!(pairs, vec![(845, 2), (850, 3), (860, 2)]);
    }

    #[test]
    fn single_record_folds_to_one_point() {
        let records =
            parse_log("A,Access,2009-04-15 14:05\n".as_bytes(), TimestampFormat::Auto).unwrap();
        let series = fold(&records, Periodicity::Daily, Granularity::Minute, None).unwrap();
        assert_eq!(series.points(), &[FoldedPoint { time_point: 845, access_count: 1 }]);
        assert_eq!(series.period_count(), 1);
    }

    #[test]
    fn period_count_is_inclusive() {
        let input = "A,Access,2009-02-15 14:05\nA,Access,2009-02-22 10:00\n";
        let records = parse_log(input.as_bytes(), TimestampFormat::Auto).unwrap();
        assert_eq!(period_count(&records, Periodicity::Daily).unwrap(), 8);
        // 2009-02-15 is a Sunday, 2009-02-22 the Sunday after: two Monday-anchored weeks.
        assert_eq!(period_count(&records, Periodicity::Weekly).unwrap(), 2);
    }

    #[test]
    fn period_count_of_one_day() {
        let input = "A,Access,2009-02-15 14:05\nA,Access,2009-02-15 20:00\n";
        let records = parse_log(input.as_bytes(), TimestampFormat::Auto).unwrap();
        assert_eq!(period_count(&records, Periodicity::Daily).unwrap(), 1);
    }

    #[test]
    fn empty_input_needs_an_override() {
        assert!(matches!(
            fold(&[], Periodicity::Daily, Granularity::Minute, None),
            Err(Error::EmptyFold)
        ));
        let series = fold(&[], Periodicity::Daily, Granularity::Minute, Some(7)).unwrap();
        assert!(series.points().is_empty());
        assert_eq!(series.period_count(), 7);
    }

    #[test]
    fn mixed_entities_are_rejected() {
        let input = "A,Access,2009-02-15 14:05\nB,Access,2009-02-15 14:06\n";
        let records = parse_log(input.as_bytes(), TimestampFormat::Auto).unwrap();
        assert!(matches!(
            fold(&records, Periodicity::Daily, Granularity::Minute, None),
            Err(Error::MixedEntities { .. })
        ));
    }

    #[test]
    fn uncleaned_records_are_rejected() {
        let input = "A,NotAccess,2009-02-15 14:05\n";
        let records = parse_log(input.as_bytes(), TimestampFormat::Auto).unwrap();
        assert!(matches!(
            fold(&records, Periodicity::Daily, Granularity::Minute, Some(1)),
            Err(Error::NotCleaned { .. })
        ));
    }

    #[test]
    fn series_invariants_are_enforced() {
        let daily = |pairs: &[(u32, u32)], n| {
            FoldedSeries::from_pairs("A", Periodicity::Daily, Granularity::Minute, pairs, n)
        };
        assert!(daily(&[(10, 1), (10, 2)], 7).is_err()); // duplicate point
        assert!(daily(&[(10, 0)], 7).is_err()); // zero count
        assert!(daily(&[(1440, 1)], 7).is_err()); // outside the period
        assert!(daily(&[(10, 1)], 0).is_err()); // N must be positive
        assert!(daily(&[(10, 1), (20, 2)], 7).is_ok());
    }

    #[test]
    fn folded_csv_round_trips() {
        let partitions = sample_partitions();
        let series: Vec<FoldedSeries> = partitions
            .values()
            .map(|records| fold(records, Periodicity::Daily, Granularity::Minute, Some(7)).unwrap())
            .collect();
        let table =
            FoldedTable::new(Periodicity::Daily, Granularity::Minute, 7, series).unwrap();
        let mut buffer = Vec::new();
        write_folded(&mut buffer, &table).unwrap();
        let text = String::from_utf8(buffer.clone()).unwrap();
        assert!(text.starts_with("# periodicity=daily granularity=minute n=7\n"));
        let back = read_folded(buffer.as_slice()).unwrap();
        assert_eq!(back, table);
    }

    #[test]
    fn folded_tables_check_their_series() {
        let series = fold(
            &sample_partitions()["Citeseer.com"],
            Periodicity::Daily,
            Granularity::Minute,
            Some(7),
        )
        .unwrap();
        let mismatched =
            FoldedTable::new(Periodicity::Weekly, Granularity::Minute, 7, vec![series.clone()]);
        assert!(matches!(mismatched, Err(Error::Config(_))));
        let wrong_n =
            FoldedTable::new(Periodicity::Daily, Granularity::Minute, 8, vec![series]);
        assert!(matches!(wrong_n, Err(Error::Config(_))));

        let empty = FoldedTable::new(Periodicity::Daily, Granularity::Minute, 7, Vec::new()).unwrap();
        let mut buffer = Vec::new();
        write_folded(&mut buffer, &empty).unwrap();
        assert_eq!(read_folded(buffer.as_slice()).unwrap(), empty);
    }

    #[test]
    fn folded_csv_without_metadata_is_rejected() {
        let input = "entity,timePoint,accessCount\nA,10,1\n";
        assert!(matches!(read_folded(input.as_bytes()), Err(Error::Parse { line: 1, .. })));
    }
}
