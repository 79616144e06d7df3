//! Calendar timestamps, folding periods, and time points.
//!
//! A *time point* is an integer offset from the start of a period, measured
//! in granularity units: minutes since midnight for daily/minute folding,
//! minutes since Monday 00:00 for weekly/minute, and the analogous second
//! counts for second granularity.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Offset from the start of a period, in granularity units.
pub type TimePoint = u32;

/// The repeating unit that raw timestamps are folded over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Periodicity {
    Daily,
    Weekly,
}

/// Resolution of time points within a period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Minute,
    Second,
}

impl fmt::Display for Periodicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Periodicity::Daily => "daily",
            Periodicity::Weekly => "weekly",
        })
    }
}

impl FromStr for Periodicity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "daily" | "day" => Ok(Periodicity::Daily),
            "weekly" | "week" => Ok(Periodicity::Weekly),
            other => Err(Error::Config(format!("unknown periodicity {other:?}"))),
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::Minute => "minute",
            Granularity::Second => "second",
        })
    }
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "minute" | "min" => Ok(Granularity::Minute),
            "second" | "sec" => Ok(Granularity::Second),
            other => Err(Error::Config(format!("unknown granularity {other:?}"))),
        }
    }
}

/// Number of granularity units in one period.
pub fn period_length(periodicity: Periodicity, granularity: Granularity) -> u32 {
    let minutes = match periodicity {
        Periodicity::Daily => 24 * 60,
        Periodicity::Weekly => 7 * 24 * 60,
    };
    match granularity {
        Granularity::Minute => minutes,
        Granularity::Second => minutes * 60,
    }
}

/// Offset of `ts` within its period. Weeks are anchored at Monday 00:00.
pub fn time_point(ts: NaiveDateTime, periodicity: Periodicity, granularity: Granularity) -> TimePoint {
    let minute_of_day = ts.hour() * 60 + ts.minute();
    let minutes = match periodicity {
        Periodicity::Daily => minute_of_day,
        Periodicity::Weekly => ts.weekday().num_days_from_monday() * 24 * 60 + minute_of_day,
    };
    match granularity {
        Granularity::Minute => minutes,
        Granularity::Second => minutes * 60 + ts.second(),
    }
}

/// Clock rendering of a time point: `H:MM` for minutes, `H:MM:SS` for seconds.
/// Hours count from the period start and may exceed 23 for weekly folding.
pub fn clock(offset: TimePoint, granularity: Granularity) -> String {
    match granularity {
        Granularity::Minute => format!("{}:{:02}", offset / 60, offset % 60),
        Granularity::Second => {
            format!("{}:{:02}:{:02}", offset / 3600, (offset / 60) % 60, offset % 60)
        }
    }
}

/// Which timestamp spellings `parse_timestamp` should accept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimestampFormat {
    /// Try every supported format per value.
    #[default]
    Auto,
    /// `M/D/YYYY h:mm am|pm`
    MonthDayYear,
    /// `YYYY-MM-DD HH:MM` (a `T` separator is also accepted)
    Iso8601,
}

impl fmt::Display for TimestampFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimestampFormat::Auto => "auto",
            TimestampFormat::MonthDayYear => "mdy",
            TimestampFormat::Iso8601 => "iso",
        })
    }
}

impl FromStr for TimestampFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(TimestampFormat::Auto),
            "mdy" => Ok(TimestampFormat::MonthDayYear),
            "iso" | "iso8601" | "iso-8601" => Ok(TimestampFormat::Iso8601),
            other => Err(Error::Config(format!("unknown timestamp format {other:?}"))),
        }
    }
}

const MDY_FORMAT: &str = "%m/%d/%Y %I:%M %p";
const ISO_FORMATS: &[&str] = &["%Y-%m-%d %H:%M", "%Y-%m-%dT%H:%M"];

/// Parse a minute-precision timestamp in the selected format.
pub fn parse_timestamp(text: &str, format: TimestampFormat) -> Option<NaiveDateTime> {
    let text = text.trim();
    let mdy = || NaiveDateTime::parse_from_str(text, MDY_FORMAT).ok();
    let iso = || {
        ISO_FORMATS
            .iter()
            .find_map(|f| NaiveDateTime::parse_from_str(text, f).ok())
    };
    match format {
        TimestampFormat::MonthDayYear => mdy(),
        TimestampFormat::Iso8601 => iso(),
        TimestampFormat::Auto => mdy().or_else(iso),
    }
}

/// Canonical serialization: ISO `YYYY-MM-DD HH:MM`.
pub fn format_timestamp(ts: NaiveDateTime) -> String {
    ts.format("%Y-%m-%d %H:%M").to_string()
}
