//! Significant interval discovery.
//!
//! A significant interval of one entity is a window over folded time points
//! that reaches the minimum confidence, fits the span cap when one is given,
//! and does not strictly contain another such window. Both procedures here
//! take a single greedy pass: every folded point serves as a start, the
//! window extends rightward point by point, and extension stops at the first
//! end point where the accumulated access count reaches the threshold.
//! Containment pruning afterwards leaves exactly the minimal windows.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fed::Semantics;
use crate::folding::FoldedSeries;
use crate::ingest::csv_io_error;
use crate::percent;
use crate::time::{clock, Granularity, Periodicity, TimePoint};

/// Minimum confidence threshold, held exactly as basis points
/// (hundredths of a percent), 1 to 10000.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct MinConf(u32);

impl MinConf {
    pub fn from_basis_points(basis_points: u32) -> Result<MinConf> {
        if basis_points == 0 || basis_points > 10_000 {
            return Err(Error::Config(format!(
                "min-conf must be above 0 and at most 100, got {} basis points",
                basis_points
            )));
        }
        Ok(MinConf(basis_points))
    }

    pub fn basis_points(&self) -> u32 {
        self.0
    }

    pub fn as_ratio(&self) -> Ratio<u64> {
        Ratio::new(u64::from(self.0), 100)
    }

    /// Percent text without trailing zeros: 6000 prints as "60", 6050 as "60.5".
    pub fn as_percent_text(&self) -> String {
        let (int, frac) = (self.0 / 100, self.0 % 100);
        if frac == 0 {
            format!("{int}")
        } else if frac % 10 == 0 {
            format!("{int}.{}", frac / 10)
        } else {
            format!("{int}.{frac:02}")
        }
    }

    /// Exact threshold test: 100 * ac >= minConf * N, in integers.
    pub fn met(&self, access_count: u64, period_count: u32) -> bool {
        u128::from(access_count) * 10_000 >= u128::from(self.0) * u128::from(period_count)
    }
}

impl FromStr for MinConf {
    type Err = Error;

    fn from_str(text: &str) -> Result<MinConf> {
        let value = percent::parse(text).map_err(Error::Config)?;
        let scaled = value * Ratio::from_integer(100);
        debug_assert!(scaled.is_integer());
        let basis_points = scaled.to_integer();
        if basis_points > 10_000 {
            return Err(Error::Config(format!("min-conf must be at most 100, got {text}")));
        }
        MinConf::from_basis_points(basis_points as u32)
    }
}

impl fmt::Display for MinConf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_percent_text())
    }
}

impl Serialize for MinConf {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.as_percent_text())
    }
}

impl<'de> Deserialize<'de> for MinConf {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<MinConf, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Full parameter bundle for a mining run. `max_len` of `None` means no
/// span cap (the AllSI procedure).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MiningConfig {
    pub periodicity: Periodicity,
    pub granularity: Granularity,
    pub min_conf: MinConf,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_len: Option<u32>,
    pub window: u32,
    pub semantics: Semantics,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n_override: Option<u32>,
}

/// One discovered interval: [Ts, Te, ac, l, d, c] for one entity.
/// Density and confidence derive from the stored fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignificantInterval {
    pub entity: String,
    pub start: TimePoint,
    pub end: TimePoint,
    pub access_count: u64,
    /// Number of folded points inside [start, end].
    pub point_count: u32,
    pub period_count: u32,
}

impl SignificantInterval {
    /// Te - Ts in granularity units, the quantity the span cap compares.
    pub fn span(&self) -> u32 {
        self.end - self.start
    }

    /// Inclusive length Te - Ts + 1.
    pub fn length(&self) -> u32 {
        self.span() + 1
    }

    /// d = ac / (Te - Ts + 1).
    pub fn density(&self) -> Ratio<u64> {
        Ratio::new(self.access_count, u64::from(self.length()))
    }

    /// c = 100 * ac / N, as an exact percent.
    pub fn confidence(&self) -> Ratio<u64> {
        Ratio::new(100 * self.access_count, u64::from(self.period_count))
    }
}

/// How two intervals of one entity relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalRelation {
    Disjoint,
    Overlapping,
    Contained,
    Equal,
}

/// One-Pass-SI: greedy discovery with the span cap applied.
pub fn one_pass_si(
    series: &FoldedSeries,
    min_conf: MinConf,
    max_len: u32,
) -> Vec<SignificantInterval> {
    discover(series, min_conf, Some(max_len))
}

/// One-Pass-AllSI: identical to One-Pass-SI with the span test removed.
pub fn one_pass_allsi(series: &FoldedSeries, min_conf: MinConf) -> Vec<SignificantInterval> {
    discover(series, min_conf, None)
}

fn discover(
    series: &FoldedSeries,
    min_conf: MinConf,
    max_len: Option<u32>,
) -> Vec<SignificantInterval> {
    let points = series.points();
    let n = series.period_count();
    let mut candidates = Vec::new();
    for (i, start) in points.iter().enumerate() {
        let mut access_count = 0u64;
        for (j, end) in points.iter().enumerate().skip(i) {
            access_count += u64::from(end.access_count);
            if !min_conf.met(access_count, n) {
                continue;
            }
            let span = end.time_point - start.time_point;
            if max_len.is_none_or(|cap| span <= cap) {
                candidates.push(SignificantInterval {
                    entity: series.entity().to_string(),
                    start: start.time_point,
                    end: end.time_point,
                    access_count,
                    point_count: (j - i + 1) as u32,
                    period_count: n,
                });
            }
            break;
        }
    }
    prune_contained(candidates)
}

/// Drop every candidate that strictly contains another candidate.
/// Candidates are compared against the full input, so chains of containment
/// leave only the innermost windows; survivors keep their order.
pub fn prune_contained(candidates: Vec<SignificantInterval>) -> Vec<SignificantInterval> {
    let keep: Vec<bool> = candidates
        .iter()
        .map(|outer| {
            !candidates.iter().any(|inner| {
                inner.start >= outer.start
                    && inner.end <= outer.end
                    && (inner.start, inner.end) != (outer.start, outer.end)
            })
        })
        .collect();
    candidates
        .into_iter()
        .zip(keep)
        .filter_map(|(interval, keep)| keep.then_some(interval))
        .collect()
}

/// Classify a pair of intervals of the same entity.
pub fn classify_pair(a: &SignificantInterval, b: &SignificantInterval) -> IntervalRelation {
    if (a.start, a.end) == (b.start, b.end) {
        IntervalRelation::Equal
    } else if (a.start <= b.start && b.end <= a.end) || (b.start <= a.start && a.end <= b.end) {
        IntervalRelation::Contained
    } else if a.start <= b.end && b.start <= a.end {
        IntervalRelation::Overlapping
    } else {
        IntervalRelation::Disjoint
    }
}

/// Write intervals as CSV sorted by (entity, Ts, Te), with time points in
/// both offset and clock form, density to 4 places, confidence to 2.
pub fn write_intervals<W: Write>(
    writer: W,
    intervals: &[SignificantInterval],
    granularity: Granularity,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([
        "entity",
        "startPoint",
        "startClock",
        "endPoint",
        "endClock",
        "accessCount",
        "span",
        "density",
        "confidence",
    ])
    .map_err(csv_io_error)?;
    let mut ordered: Vec<&SignificantInterval> = intervals.iter().collect();
    ordered.sort_by(|a, b| (&a.entity, a.start, a.end).cmp(&(&b.entity, b.start, b.end)));
    for interval in ordered {
        out.write_record([
            interval.entity.as_str(),
            &interval.start.to_string(),
            &clock(interval.start, granularity),
            &interval.end.to_string(),
            &clock(interval.end, granularity),
            &interval.access_count.to_string(),
            &interval.span().to_string(),
            &percent::format_ratio(interval.density(), 4),
            &percent::format_ratio(interval.confidence(), 2),
        ])
        .map_err(csv_io_error)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(entity: &str, pairs: &[(u32, u32)], n: u32) -> FoldedSeries {
        FoldedSeries::from_pairs(entity, Periodicity::Daily, Granularity::Minute, pairs, n)
            .unwrap()
    }

    fn minconf(text: &str) -> MinConf {
        text.parse().unwrap()
    }

    fn bounds(intervals: &[SignificantInterval]) -> Vec<(u32, u32, u64)> {
        intervals.iter().map(|i| (i.start, i.end, i.access_count)).collect()
    }

    fn sample_citeseer() -> FoldedSeries {
        series("Citeseer.com", &[(845, 3), (850, 3), (880, 2)], 7)
    }

    fn sample_rgtu() -> FoldedSeries {
        series("Rgtu.net", &[(845, 2), (850, 3), (860, 2)], 7)
    }

    #[test]
    fn minconf_parses_and_round_trips() {
        assert_eq!(minconf("60").basis_points(), 6000);
        assert_eq!(minconf("60.5").basis_points(), 6050);
        assert_eq!(minconf("60.55").basis_points(), 6055);
        assert_eq!(minconf("100").basis_points(), 10_000);
        assert!("0".parse::<MinConf>().is_err());
        assert!("100.01".parse::<MinConf>().is_err());
        assert!("60.555".parse::<MinConf>().is_err());
        for text in ["60", "60.5", "60.55", "0.01"] {
            assert_eq!(minconf(text).as_percent_text(), text);
        }
    }

    #[test]
    fn minconf_threshold_is_inclusive() {
        let threshold = minconf("60");
        assert!(threshold.met(6, 10));
        assert!(!threshold.met(5, 10));
        // 5/7 is above 60%, 4/7 is below.
        assert!(threshold.met(5, 7));
        assert!(!threshold.met(4, 7));
    }

    #[test]
    fn si_on_the_first_sample_series() {
        let found = one_pass_si(&sample_citeseer(), minconf("60"), 20);
        assert_eq!(bounds(&found), vec![(845, 850, 6)]);
        assert_eq!(percent::format(found[0].confidence()), "85.71");
        assert_eq!(found[0].point_count, 2);
    }

    #[test]
    fn si_on_the_second_sample_series() {
        let found = one_pass_si(&sample_rgtu(), minconf("60"), 20);
        assert_eq!(bounds(&found), vec![(845, 850, 5), (850, 860, 5)]);
        for interval in &found {
            assert_eq!(percent::format(interval.confidence()), "71.43");
        }
    }

    #[test]
    fn allsi_keeps_the_span_violating_interval() {
        let found = one_pass_allsi(&sample_citeseer(), minconf("60"));
        assert_eq!(bounds(&found), vec![(845, 850, 6), (850, 880, 5)]);
        let found = one_pass_allsi(&sample_rgtu(), minconf("60"));
        assert_eq!(bounds(&found), vec![(845, 850, 5), (850, 860, 5)]);
    }

    #[test]
    fn a_single_hot_point_is_a_unit_interval() {
        let found = one_pass_si(&series("A", &[(120, 5)], 7), minconf("60"), 0);
        assert_eq!(bounds(&found), vec![(120, 120, 5)]);
        assert_eq!(percent::format(found[0].confidence()), "71.43");
    }

    #[test]
    fn container_of_a_unit_interval_is_pruned() {
        let found = one_pass_si(&series("A", &[(120, 1), (125, 5)], 7), minconf("60"), 20);
        assert_eq!(bounds(&found), vec![(125, 125, 5)]);
    }

    #[test]
    fn empty_series_yields_nothing() {
        let empty = series("A", &[], 7);
        assert!(one_pass_si(&empty, minconf("60"), 20).is_empty());
        assert!(one_pass_allsi(&empty, minconf("60")).is_empty());
    }

    #[test]
    fn boundary_confidence_is_included() {
        // 6 of 10 periods is exactly 60%.
        let found = one_pass_si(&series("A", &[(100, 6)], 10), minconf("60"), 0);
        assert_eq!(bounds(&found), vec![(100, 100, 6)]);
        assert!(one_pass_si(&series("A", &[(100, 6)], 10), minconf("60.01"), 0).is_empty());
    }

    #[test]
    fn max_len_zero_yields_only_unit_intervals() {
        let input = series("A", &[(100, 2), (105, 2), (110, 5)], 7);
        let found = one_pass_si(&input, minconf("60"), 0);
        assert_eq!(bounds(&found), vec![(110, 110, 5)]);
    }

    #[test]
    fn prune_drops_only_strict_containers() {
        let make = |start, end| SignificantInterval {
            entity: "A".into(),
            start,
            end,
            access_count: 5,
            point_count: 1,
            period_count: 7,
        };
        let pruned = prune_contained(vec![make(120, 125), make(125, 125)]);
        assert_eq!(bounds(&pruned), vec![(125, 125, 5)]);
        let disjoint = prune_contained(vec![make(60, 70), make(120, 130)]);
        assert_eq!(disjoint.len(), 2);
        let overlapping = prune_contained(vec![make(125, 130), make(130, 140)]);
        assert_eq!(overlapping.len(), 2);
    }

    #[test]
    fn pair_classification() {
        let make = |start, end| SignificantInterval {
            entity: "A".into(),
            start,
            end,
            access_count: 1,
            point_count: 1,
            period_count: 7,
        };
        let relation = |a: (u32, u32), b: (u32, u32)| {
            classify_pair(&make(a.0, a.1), &make(b.0, b.1))
        };
        assert_eq!(relation((125, 130), (130, 140)), IntervalRelation::Overlapping);
        assert_eq!(relation((60, 70), (120, 130)), IntervalRelation::Disjoint);
        assert_eq!(relation((120, 130), (123, 127)), IntervalRelation::Contained);
        assert_eq!(relation((123, 127), (120, 130)), IntervalRelation::Contained);
        assert_eq!(relation((120, 130), (120, 130)), IntervalRelation::Equal);
        // Shared endpoint with strict containment stays Contained.
        assert_eq!(relation((120, 130), (120, 125)), IntervalRelation::Contained);
    }

    #[test]
    fn interval_csv_layout() {
        let found = one_pass_si(&sample_citeseer(), minconf("60"), 20);
        let mut buffer = Vec::new();
        write_intervals(&mut buffer, &found, Granularity::Minute).unwrap();
        let text = String::from_utf8(buffer).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "entity,startPoint,startClock,endPoint,endClock,accessCount,span,density,confidence"
        );
        assert_eq!(lines.next().unwrap(), "Citeseer.com,845,14:05,850,14:10,6,5,1.0000,85.71");
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn mining_config_serializes_losslessly() {
        let config = MiningConfig {
            periodicity: Periodicity::Daily,
            granularity: Granularity::Minute,
            min_conf: minconf("60.5"),
            max_len: Some(20),
            window: 30,
            semantics: Semantics::S,
            n_override: Some(7),
        };
        let json = serde_json::to_string(&config).unwrap();
        let back: MiningConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, config);
    }
}
