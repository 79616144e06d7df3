//! Frequent episode discovery over significant intervals.
//!
//! An episode groups distinct entities whose significant intervals fall
//! inside one sequential window. Discovery is a single pass over the
//! intervals sorted by start point: each interval in turn is the base of a
//! chain, the scan moves forward absorbing admissible intervals of entities
//! not yet in the chain, and every absorption emits an episode one level
//! higher. The scan stops at the first start point beyond the window,
//! which sortedness makes final, and the chain stops growing at the number
//! of distinct entities in the input.
//!
//! Under Semantics-S a joiner must start within the window of the base's
//! start. Under Semantics-E its end must also fall within that window, and
//! the chain stops at the first joiner whose end violates it; stopping
//! keeps every Semantics-E chain a prefix of the Semantics-S chain, so the
//! E output is always a subset of the S output. The base's own end is not
//! constrained.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::csv_io_error;
use crate::percent;
use crate::sid::SignificantInterval;
use crate::time::TimePoint;

/// Sequential window admission rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    /// Joiners start within the window of the base's start.
    S,
    /// Joiners start and end within the window of the base's start.
    E,
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semantics::S => "s",
            Semantics::E => "e",
        })
    }
}

impl FromStr for Semantics {
    type Err = Error;

    fn from_str(text: &str) -> Result<Semantics> {
        match text.trim().to_ascii_lowercase().as_str() {
            "s" => Ok(Semantics::S),
            "e" => Ok(Semantics::E),
            other => Err(Error::Config(format!("unknown semantics {other:?}, expected s or e"))),
        }
    }
}

/// One interval as episode discovery consumes it: bounds plus the exact
/// confidence percent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FedInterval {
    pub entity: String,
    pub start: TimePoint,
    pub end: TimePoint,
    pub confidence: Ratio<u64>,
}

impl From<&SignificantInterval> for FedInterval {
    fn from(interval: &SignificantInterval) -> FedInterval {
        FedInterval {
            entity: interval.entity.clone(),
            start: interval.start,
            end: interval.end,
            confidence: interval.confidence(),
        }
    }
}

/// Episode discovery input: intervals sorted by start point (stable among
/// equal starts) plus the distinct entity count n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FedInput {
    intervals: Vec<FedInterval>,
    distinct_entities: usize,
}

impl FedInput {
    /// Stable-sorts by start point, preserving input order among equal starts.
    pub fn sorted(mut intervals: Vec<FedInterval>) -> Result<FedInput> {
        intervals.sort_by_key(|interval| interval.start);
        FedInput::checked(intervals)
    }

    /// Accepts intervals already in non-decreasing start order.
    pub fn from_sorted(intervals: Vec<FedInterval>) -> Result<FedInput> {
        for (index, pair) in intervals.windows(2).enumerate() {
            if pair[0].start > pair[1].start {
                return Err(Error::UnsortedIntervals { index: index + 1 });
            }
        }
        FedInput::checked(intervals)
    }

    fn checked(intervals: Vec<FedInterval>) -> Result<FedInput> {
        for interval in &intervals {
            if interval.start > interval.end {
                return Err(Error::Config(format!(
                    "interval for {:?} ends at {} before it starts at {}",
                    interval.entity, interval.end, interval.start
                )));
            }
        }
        let distinct_entities =
            intervals.iter().map(|i| i.entity.as_str()).collect::<BTreeSet<_>>().len();
        Ok(FedInput { intervals, distinct_entities })
    }

    pub fn intervals(&self) -> &[FedInterval] {
        &self.intervals
    }

    /// n: the chain level cap.
    pub fn distinct_entity_count(&self) -> usize {
        self.distinct_entities
    }
}

/// An episode: member intervals in accretion order (base first), the
/// pattern interval they span, and the Pattern Confidence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Episode {
    pub members: Vec<FedInterval>,
    pub start: TimePoint,
    pub end: TimePoint,
    pub pattern_confidence: Ratio<u64>,
}

impl Episode {
    pub fn level(&self) -> usize {
        self.members.len()
    }

    pub fn entities(&self) -> impl Iterator<Item = &str> {
        self.members.iter().map(|member| member.entity.as_str())
    }
}

/// Pattern Confidence: the minimum of the member confidences.
pub fn pattern_confidence(confidences: &[Ratio<u64>]) -> Result<Ratio<u64>> {
    confidences.iter().min().copied().ok_or(Error::EmptyConfidences)
}

/// One-Pass-FED over start-sorted intervals.
pub fn one_pass_fed(input: &FedInput, window: u32, semantics: Semantics) -> Vec<Episode> {
    let intervals = input.intervals();
    let cap = input.distinct_entity_count();
    let mut episodes = Vec::new();
    for (b, base) in intervals.iter().enumerate() {
        let mut chain: Vec<&FedInterval> = vec![base];
        let mut end = base.end;
        let mut confidence = base.confidence;
        for candidate in &intervals[b + 1..] {
            if chain.len() == cap {
                break;
            }
            if candidate.start - base.start > window {
                break;
            }
            if chain.iter().any(|member| member.entity == candidate.entity) {
                continue;
            }
            if semantics == Semantics::E && candidate.end - base.start > window {
                break;
            }
            chain.push(candidate);
            end = end.max(candidate.end);
            confidence = confidence.min(candidate.confidence);
            episodes.push(Episode {
                members: chain.iter().map(|&member| member.clone()).collect(),
                start: base.start,
                end,
                pattern_confidence: confidence,
            });
        }
    }
    episodes.sort_by_key(Episode::level);
    episodes
}

/// Group episodes by level, preserving base order within each level.
pub fn episodes_by_level(episodes: &[Episode]) -> BTreeMap<usize, Vec<&Episode>> {
    let mut by_level: BTreeMap<usize, Vec<&Episode>> = BTreeMap::new();
    for episode in episodes {
        by_level.entry(episode.level()).or_default().push(episode);
    }
    by_level
}

/// Read intervals for episode discovery from CSV. The header must name
/// entity, startPoint, endPoint and confidence columns; extra columns
/// (the significant-interval output format) are ignored. Rows keep file
/// order; sorting is the caller's choice.
pub fn read_fed_intervals<R: Read>(reader: R) -> Result<Vec<FedInterval>> {
    let mut reader =
        csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = reader.headers().map_err(csv_io_error)?.clone();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing column {name:?}"),
        })
    };
    let entity_at = column("entity")?;
    let start_at = column("startPoint")?;
    let end_at = column("endPoint")?;
    let confidence_at = column("confidence")?;

    let mut intervals = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |at: usize| {
            row.get(at).ok_or_else(|| Error::Parse {
                line,
                message: format!("expected at least {} columns, found {}", at + 1, row.len()),
            })
        };
        let entity = field(entity_at)?.to_string();
        if entity.is_empty() {
            return Err(Error::Parse { line, message: "empty entity".into() });
        }
        let point = |at: usize| -> Result<TimePoint> {
            let text = field(at)?;
            text.parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad time point {text:?}"),
            })
        };
        let start = point(start_at)?;
        let end = point(end_at)?;
        if start > end {
            return Err(Error::Parse {
                line,
                message: format!("interval ends at {end} before it starts at {start}"),
            });
        }
        let confidence = percent::parse(field(confidence_at)?)
            .map_err(|message| Error::Parse { line, message })?;
        intervals.push(FedInterval { entity, start, end, confidence });
    }
    Ok(intervals)
}

/// Write one level's episodes as CSV: entity1..entityK, start, end,
/// Pattern Confidence to 2 places. Every episode must have the level.
pub fn write_episode_level<W: Write>(
    writer: W,
    episodes: &[&Episode],
    level: usize,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=level).map(|k| format!("entity{k}")).collect();
    header.extend(["startPoint".into(), "endPoint".into(), "patternConfidence".into()]);
    out.write_record(&header).map_err(csv_io_error)?;
    for episode in episodes {
        if episode.level() != level {
            return Err(Error::Config(format!(
                "episode of level {} in a level-{level} table",
                episode.level()
            )));
        }
        let mut row: Vec<String> = episode.entities().map(String::from).collect();
        row.extend([
            episode.start.to_string(),
            episode.end.to_string(),
            percent::format(episode.pattern_confidence),
        ]);
        out.write_record(&row).map_err(csv_io_error)?;
    }
    out.flush()?;
    Ok(())
}
