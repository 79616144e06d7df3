//! Synthetic data generation, parameter sweeps, and the contribution report.
//!
//! The generator emits seeded, reproducible access logs with per-entity
//! activity peaks; the sweeps rerun discovery across one varying parameter
//! and report counts plus wall time. Counts are deterministic for a given
//! dataset; elapsed times are measurements and never asserted on.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::time::Instant;

use chrono::{NaiveDate, NaiveTime};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fed::{one_pass_fed, Episode, FedInput, FedInterval, Semantics};
use crate::folding::{fold, FoldedSeries};
use crate::ingest::{clean, csv_io_error, AccessStatus, LogRecord};
use crate::percent;
use crate::sid::{one_pass_allsi, one_pass_si, MinConf, MiningConfig};
use crate::time::{period_length, Granularity, Periodicity};

/// One synthetic entity: activity peaks as minute offsets within the day,
/// jitter spread around each peak, and a per-day firing probability per peak.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EntitySpec {
    pub name: String,
    pub peaks: Vec<u32>,
    pub spread: u32,
    pub daily_rate: f64,
}

/// A full synthetic dataset description. Generation is deterministic in
/// the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GeneratorSpec {
    pub seed: u64,
    pub days: u32,
    pub start_date: NaiveDate,
    pub entities: Vec<EntitySpec>,
}

impl GeneratorSpec {
    fn validate(&self) -> Result<()> {
        if self.days == 0 {
            return Err(Error::Config("generator needs at least one day".into()));
        }
        let minutes = period_length(Periodicity::Daily, Granularity::Minute);
        for entity in &self.entities {
            if entity.name.is_empty() {
                return Err(Error::Config("generator entity name is empty".into()));
            }
            if !(0.0..=1.0).contains(&entity.daily_rate) {
                return Err(Error::Config(format!(
                    "daily rate {} for {:?} is not a probability",
                    entity.daily_rate, entity.name
                )));
            }
            if let Some(peak) = entity.peaks.iter().find(|&&peak| peak >= minutes) {
                return Err(Error::Config(format!(
                    "peak {peak} for {:?} is outside the day",
                    entity.name
                )));
            }
        }
        Ok(())
    }

    /// Expected row count: days times the summed per-day firing rates.
    pub fn expected_rows(&self) -> f64 {
        let rate_mass: f64 =
            self.entities.iter().map(|e| e.peaks.len() as f64 * e.daily_rate).sum();
        f64::from(self.days) * rate_mass
    }
}

/// The standard benchmark shape: 90 days, 5 entities with overlapping
/// peaks, about 1700 rows in expectation.
pub fn benchmark(seed: u64) -> GeneratorSpec {
    let entity = |name: &str, peaks: &[u32], daily_rate: f64| EntitySpec {
        name: name.into(),
        peaks: peaks.to_vec(),
        spread: 5,
        daily_rate,
    };
    GeneratorSpec {
        seed,
        days: 90,
        start_date: NaiveDate::from_ymd_opt(2009, 2, 2).unwrap(),
        entities: vec![
            entity("news.example", &[540, 720, 1080, 1260], 0.95),
            entity("mail.example", &[545, 725, 900, 1085], 0.90),
            entity("search.example", &[550, 730, 905, 1265], 0.95),
            entity("video.example", &[555, 910, 1090, 1270], 0.90),
            entity("forum.example", &[60, 565, 735, 915, 1275], 0.82),
        ],
    }
}

/// Generate access records: per day, entity and peak, fire with the daily
/// rate and jitter the offset uniformly within the spread, clamped to the
/// day. Output order is day, then entity, then peak.
pub fn generate(spec: &GeneratorSpec) -> Result<Vec<LogRecord>> {
    spec.validate()?;
    let day_minutes = i64::from(period_length(Periodicity::Daily, Granularity::Minute));
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut records = Vec::new();
    for day in 0..spec.days {
        let date = spec.start_date + chrono::Duration::days(i64::from(day));
        for entity in &spec.entities {
            for &peak in &entity.peaks {
                if !rng.gen_bool(entity.daily_rate) {
                    continue;
                }
                let spread = i64::from(entity.spread);
                let jitter = rng.gen_range(-spread..=spread);
                let offset = (i64::from(peak) + jitter).clamp(0, day_minutes - 1) as u32;
                let time = NaiveTime::from_hms_opt(offset / 60, offset % 60, 0).unwrap();
                records.push(LogRecord {
                    entity: entity.name.clone(),
                    status: AccessStatus::Access,
                    timestamp: date.and_time(time),
                });
            }
        }
    }
    Ok(records)
}

/// One sweep measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRow {
    pub parameter_value: String,
    pub count: u64,
    pub elapsed_micros: u64,
}

/// A named parameter sweep, rows in ascending parameter order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepResult {
    pub parameter: String,
    pub rows: Vec<SweepRow>,
}

fn elapsed_micros(started: Instant) -> u64 {
    u64::try_from(started.elapsed().as_micros()).unwrap_or(u64::MAX)
}

/// Total interval count across the dataset for each span cap.
pub fn sweep_maxlen(
    dataset: &[FoldedSeries],
    min_conf: MinConf,
    max_lens: &[u32],
) -> SweepResult {
    let mut values = max_lens.to_vec();
    values.sort_unstable();
    let rows = values
        .into_iter()
        .map(|cap| {
            let started = Instant::now();
            let count =
                dataset.iter().map(|s| one_pass_si(s, min_conf, cap).len() as u64).sum();
            SweepRow {
                parameter_value: cap.to_string(),
                count,
                elapsed_micros: elapsed_micros(started),
            }
        })
        .collect();
    SweepResult { parameter: "maxLen".into(), rows }
}

/// Total interval count across the dataset for each confidence threshold.
pub fn sweep_minconf(
    dataset: &[FoldedSeries],
    max_len: u32,
    thresholds: &[MinConf],
) -> SweepResult {
    let mut values = thresholds.to_vec();
    values.sort_unstable_by_key(MinConf::basis_points);
    let rows = values
        .into_iter()
        .map(|min_conf| {
            let started = Instant::now();
            let count =
                dataset.iter().map(|s| one_pass_si(s, min_conf, max_len).len() as u64).sum();
            SweepRow {
                parameter_value: min_conf.as_percent_text(),
                count,
                elapsed_micros: elapsed_micros(started),
            }
        })
        .collect();
    SweepResult { parameter: "minConf".into(), rows }
}

/// Run both procedures across the thresholds; returns (SI, AllSI) sweeps.
pub fn compare_si_allsi(
    dataset: &[FoldedSeries],
    max_len: u32,
    thresholds: &[MinConf],
) -> (SweepResult, SweepResult) {
    let mut values = thresholds.to_vec();
    values.sort_unstable_by_key(MinConf::basis_points);
    let mut capped = Vec::new();
    let mut uncapped = Vec::new();
    for min_conf in values {
        let label = min_conf.as_percent_text();
        let started = Instant::now();
        let count: u64 =
            dataset.iter().map(|s| one_pass_si(s, min_conf, max_len).len() as u64).sum();
        capped.push(SweepRow {
            parameter_value: label.clone(),
            count,
            elapsed_micros: elapsed_micros(started),
        });
        let started = Instant::now();
        let count: u64 =
            dataset.iter().map(|s| one_pass_allsi(s, min_conf).len() as u64).sum();
        uncapped.push(SweepRow {
            parameter_value: label,
            count,
            elapsed_micros: elapsed_micros(started),
        });
    }
    (
        SweepResult { parameter: "minConf".into(), rows: capped },
        SweepResult { parameter: "minConf".into(), rows: uncapped },
    )
}

/// Episode count for each sequential window length.
pub fn sweep_window(input: &FedInput, windows: &[u32], semantics: Semantics) -> SweepResult {
    let mut values = windows.to_vec();
    values.sort_unstable();
    let rows = values
        .into_iter()
        .map(|window| {
            let started = Instant::now();
            let count = one_pass_fed(input, window, semantics).len() as u64;
            SweepRow {
                parameter_value: window.to_string(),
                count,
                elapsed_micros: elapsed_micros(started),
            }
        })
        .collect();
    SweepResult { parameter: "window".into(), rows }
}

/// Write a sweep as CSV: parameterValue,count,elapsedMicros.
pub fn write_sweep<W: Write>(writer: W, sweep: &SweepResult) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["parameterValue", "count", "elapsedMicros"]).map_err(csv_io_error)?;
    for row in &sweep.rows {
        out.write_record([
            row.parameter_value.as_str(),
            &row.count.to_string(),
            &row.elapsed_micros.to_string(),
        ])
        .map_err(csv_io_error)?;
    }
    out.flush()?;
    Ok(())
}

/// A calendar month tag for episode grouping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl From<NaiveDate> for YearMonth {
    fn from(date: NaiveDate) -> YearMonth {
        use chrono::Datelike;
        YearMonth { year: date.year(), month: date.month() }
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// Run the whole pipeline separately on each calendar month of the raw
/// records and tag the discovered episodes with their month.
pub fn episodes_by_month(
    records: &[LogRecord],
    config: &MiningConfig,
) -> Result<Vec<(YearMonth, Episode)>> {
    let mut months: BTreeMap<YearMonth, Vec<LogRecord>> = BTreeMap::new();
    for record in records {
        months.entry(YearMonth::from(record.timestamp.date())).or_default().push(record.clone());
    }
    let mut tagged = Vec::new();
    for (month, partition) in months {
        let mut intervals: Vec<FedInterval> = Vec::new();
        for entity_records in clean(partition).values() {
            let series =
                fold(entity_records, config.periodicity, config.granularity, config.n_override)?;
            let found = match config.max_len {
                Some(cap) => one_pass_si(&series, config.min_conf, cap),
                None => one_pass_allsi(&series, config.min_conf),
            };
            intervals.extend(found.iter().map(FedInterval::from));
        }
        let input = FedInput::sorted(intervals)?;
        for episode in one_pass_fed(&input, config.window, config.semantics) {
            tagged.push((month, episode));
        }
    }
    Ok(tagged)
}

/// One contribution row: how many of the month's episodes contain the
/// entity, and that count's share of the month's episode memberships.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContributionRow {
    pub month: YearMonth,
    pub entity: String,
    pub episodes: u64,
    /// Percent of the month's memberships; the month's shares sum to 100.
    pub share: Ratio<u64>,
}

/// Per entity and month: episode participation count and membership share.
pub fn contribution_report(tagged: &[(YearMonth, Episode)]) -> Vec<ContributionRow> {
    let mut counts: BTreeMap<(YearMonth, String), u64> = BTreeMap::new();
    let mut totals: BTreeMap<YearMonth, u64> = BTreeMap::new();
    for (month, episode) in tagged {
        for entity in episode.entities() {
            *counts.entry((*month, entity.to_string())).or_insert(0) += 1;
            *totals.entry(*month).or_insert(0) += 1;
        }
    }
    counts
        .into_iter()
        .map(|((month, entity), episodes)| ContributionRow {
            month,
            entity,
            episodes,
            share: Ratio::new(100 * episodes, totals[&month]),
        })
        .collect()
}

/// Write the contribution report as CSV: month,entity,episodes,sharePercent.
pub fn write_contribution<W: Write>(writer: W, rows: &[ContributionRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["month", "entity", "episodes", "sharePercent"]).map_err(csv_io_error)?;
    for row in rows {
        out.write_record([
            row.month.to_string().as_str(),
            &row.entity,
            &row.episodes.to_string(),
            &percent::format(row.share),
        ])
        .map_err(csv_io_error)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_peak_spec(entities: usize) -> GeneratorSpec {
        GeneratorSpec {
            seed: 9,
            days: 7,
            start_date: NaiveDate::from_ymd_opt(2009, 4, 1).unwrap(),
            entities: (0..entities)
                .map(|k| EntitySpec {
                    name: format!("site{k}.example"),
                    peaks: vec![125],
                    spread: 0,
                    daily_rate: 1.0,
                })
                .collect(),
        }
    }

    fn sample_dataset() -> Vec<FoldedSeries> {
        vec![
            FoldedSeries::from_pairs(
                "Citeseer.com",
                Periodicity::Daily,
                Granularity::Minute,
                &[(845, 3), (850, 3), (880, 2)],
                7,
            )
            .unwrap(),
            FoldedSeries::from_pairs(
                "Rgtu.net",
                Periodicity::Daily,
                Granularity::Minute,
                &[(845, 2), (850, 3), (860, 2)],
                7,
            )
            .unwrap(),
        ]
    }

    fn minconf(text: &str) -> MinConf {
        text.parse().unwrap()
    }

    fn counts(sweep: &SweepResult) -> Vec<u64> {
        sweep.rows.iter().map(|row| row.count).collect()
    }

    #[test]
    fn degenerate_spec_generates_every_day() {
        let records = generate(&single_peak_spec(1)).unwrap();
        assert_eq!(records.len(), 7);
        let series = fold(&records, Periodicity::Daily, Granularity::Minute, None).unwrap();
        let pairs: Vec<(u32, u32)> =
            series.points().iter().map(|p| (p.time_point, p.access_count)).collect();
        assert_eq!(pairs, vec![(125, 7)]);
    }

    #[test]
    fn entities_generate_independently() {
        let records = generate(&single_peak_spec(2)).unwrap();
        assert_eq!(records.len(), 14);
        let per_entity = clean(records);
        assert!(per_entity.values().all(|records| records.len() == 7));
    }

    #[test]
    fn generation_is_deterministic_in_the_seed() {
        let same = generate(&benchmark(42)).unwrap();
        assert_eq!(generate(&benchmark(42)).unwrap(), same);
        assert_ne!(generate(&benchmark(43)).unwrap(), same);
    }

    #[test]
    fn benchmark_lands_near_its_expected_size() {
        let spec = benchmark(42);
        assert!((spec.expected_rows() - 1700.0).abs() < 20.0);
        let rows = generate(&spec).unwrap().len() as f64;
        assert!((rows - 1700.0).abs() <= 170.0, "row count {rows} strays from 1700");
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = single_peak_spec(1);
        spec.days = 0;
        assert!(generate(&spec).is_err());
        let mut spec = single_peak_spec(1);
        spec.entities[0].daily_rate = 1.5;
        assert!(generate(&spec).is_err());
        let mut spec = single_peak_spec(1);
        spec.entities[0].peaks = vec![1440];
        assert!(generate(&spec).is_err());
        let mut spec = single_peak_spec(1);
        spec.entities[0].name.clear();
        assert!(generate(&spec).is_err());
    }

    #[test]
    fn maxlen_sweep_counts_rise_to_the_uncapped_ceiling() {
        let sweep = sweep_maxlen(&sample_dataset(), minconf("60"), &[2000, 0, 20]);
        assert_eq!(counts(&sweep), vec![0, 3, 4]);
        let values: Vec<&str> =
            sweep.rows.iter().map(|row| row.parameter_value.as_str()).collect();
        assert_eq!(values, vec!["0", "20", "2000"]);
    }

    #[test]
    fn minconf_sweep_counts_fall() {
        let sweep =
            sweep_minconf(&sample_dataset(), 20, &[minconf("80"), minconf("50"), minconf("60")]);
        assert_eq!(counts(&sweep), vec![3, 3, 2]);
    }

    #[test]
    fn allsi_counts_dominate_si_counts() {
        let thresholds = [minconf("50"), minconf("60"), minconf("80")];
        let (si, allsi) = compare_si_allsi(&sample_dataset(), 20, &thresholds);
        assert_eq!(counts(&si), vec![3, 3, 2]);
        assert_eq!(counts(&allsi), vec![4, 4, 2]);
    }

    #[test]
    fn window_sweep_counts_grow() {
        let confidence = Ratio::from_integer;
        let intervals = vec![
            FedInterval { entity: "C".into(), start: 60, end: 75, confidence: confidence(70) },
            FedInterval { entity: "R".into(), start: 70, end: 80, confidence: confidence(80) },
            FedInterval { entity: "N".into(), start: 120, end: 130, confidence: confidence(75) },
            FedInterval { entity: "C".into(), start: 120, end: 130, confidence: confidence(80) },
            FedInterval { entity: "R".into(), start: 125, end: 135, confidence: confidence(70) },
        ];
        let input = FedInput::from_sorted(intervals).unwrap();
        let sweep = sweep_window(&input, &[30, 0, 10], Semantics::S);
        assert_eq!(counts(&sweep), vec![1, 4, 4]);
    }

    #[test]
    fn sweep_csv_layout() {
        let sweep = SweepResult {
            parameter: "maxLen".into(),
            rows: vec![SweepRow { parameter_value: "20".into(), count: 3, elapsed_micros: 11 }],
        };
        let mut buffer = Vec::new();
        write_sweep(&mut buffer, &sweep).unwrap();
        assert_eq!(
            String::from_utf8(buffer).unwrap(),
            "parameterValue,count,elapsedMicros\n20,3,11\n"
        );
    }

    fn two_month_records() -> Vec<LogRecord> {
        let mut records = Vec::new();
        let mut push = |entity: &str, month: u32, day: u32, offset: u32| {
            let date = NaiveDate::from_ymd_opt(2009, month, day).unwrap();
            let time = NaiveTime::from_hms_opt(offset / 60, offset % 60, 0).unwrap();
            records.push(LogRecord {
                entity: entity.into(),
                status: AccessStatus::Access,
                timestamp: date.and_time(time),
            });
        };
        for day in 1..=7 {
            push("a.example", 4, day, 540);
            push("b.example", 4, day, 545);
            push("a.example", 5, day, 540);
        }
        records
    }

    fn sample_config() -> MiningConfig {
        MiningConfig {
            periodicity: Periodicity::Daily,
            granularity: Granularity::Minute,
            min_conf: minconf("60"),
            max_len: Some(20),
            window: 30,
            semantics: Semantics::S,
            n_override: None,
        }
    }

    #[test]
    fn monthly_pipeline_tags_episodes() {
        let tagged = episodes_by_month(&two_month_records(), &sample_config()).unwrap();
        assert_eq!(tagged.len(), 1);
        let (month, episode) = &tagged[0];
        assert_eq!(month.to_string(), "2009-04");
        let entities: Vec<&str> = episode.entities().collect();
        assert_eq!(entities, vec!["a.example", "b.example"]);
        assert_eq!(episode.pattern_confidence, Ratio::from_integer(100));
    }

    #[test]
    fn contribution_shares_sum_to_one_hundred() {
        let tagged = episodes_by_month(&two_month_records(), &sample_config()).unwrap();
        let report = contribution_report(&tagged);
        assert_eq!(report.len(), 2);
        for row in &report {
            assert_eq!(row.month.to_string(), "2009-04");
            assert_eq!(row.episodes, 1);
            assert_eq!(row.share, Ratio::from_integer(50));
        }
        let total: Ratio<u64> = report.iter().map(|row| row.share).sum();
        assert_eq!(total, Ratio::from_integer(100));
    }

    #[test]
    fn contribution_csv_layout() {
        let tagged = episodes_by_month(&two_month_records(), &sample_config()).unwrap();
        let mut buffer = Vec::new();
        write_contribution(&mut buffer, &contribution_report(&tagged)).unwrap();
        assert_eq!(
            String::from_utf8(buffer).unwrap(),
            "month,entity,episodes,sharePercent\n\
             2009-04,a.example,1,50.00\n\
             2009-04,b.example,1,50.00\n"
        );
    }
}
