use thiserror::Error;

/// Errors produced by the mining pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A malformed input row; `line` is 1-based within the source stream.
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    /// Folding saw records belonging to more than one entity.
    #[error("records span multiple entities: {first:?} and {second:?}")]
    MixedEntities { first: String, second: String },

    /// Folding or period counting was asked to work on nothing.
    #[error("no records to fold and no period count override given")]
    EmptyFold,

    /// A record with a non-Access status reached a stage that expects cleaned input.
    #[error("record for {entity:?} is not an access; clean the input first")]
    NotCleaned { entity: String },

    /// A parameter or configuration value is out of range or inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Episode discovery requires its input sorted by interval start.
    #[error("intervals not sorted by start point (at index {index})")]
    UnsortedIntervals { index: usize },

    /// Pattern confidence of an empty member list is undefined.
    #[error("cannot take the pattern confidence of an empty list")]
    EmptyConfidences,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
