//! Significant-interval discovery and frequent-episode mining over folded
//! event logs.
//!
//! The pipeline has four stages. [`ingest`] parses raw entity/status/
//! timestamp rows and cleans them down to per-entity access records.
//! [`folding`] folds one entity's accesses over a daily or weekly period at
//! minute or second granularity, giving per-offset access counts and the
//! period count N. [`sid`] discovers minimal significant intervals in a
//! single greedy pass, with or without a span cap. [`fed`] mines
//! multi-entity episodes from the merged intervals under a sequential
//! window. [`harness`] adds a seeded synthetic generator, parameter sweeps
//! and a contribution report; [`oracle`] holds the brute-force references
//! the test suite compares against.
//!
//! Confidences are exact rationals end to end; files round to two decimal
//! places only at the output boundary.
//!
//! ```
//! use epimine::folding::FoldedSeries;
//! use epimine::sid::{one_pass_si, MinConf};
//! use epimine::time::{Granularity, Periodicity};
//!
//! let series = FoldedSeries::from_pairs(
//!     "Citeseer.com",
//!     Periodicity::Daily,
//!     Granularity::Minute,
//!     &[(845, 3), (850, 3), (880, 2)],
//!     7,
//! )
//! .unwrap();
//! let min_conf: MinConf = "60".parse().unwrap();
//! let intervals = one_pass_si(&series, min_conf, 20);
//! assert_eq!(intervals.len(), 1);
//! assert_eq!((intervals[0].start, intervals[0].end), (845, 850));
//! ```

pub mod error;
pub mod fed;
pub mod folding;
pub mod harness;
pub mod ingest;
pub mod oracle;
pub mod percent;
pub mod sid;
pub mod time;

pub use error::{Error, Result};
