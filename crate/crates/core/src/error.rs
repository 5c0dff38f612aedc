use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("ground set size {0} is odd")]
    InvalidWordLength(usize),

    #[error("{what} = {value} exceeds the limit {limit}")]
    LimitExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("block index {index} out of range 1..={len}")]
    IndexError { index: usize, len: usize },

    #[error("partition has {partition} points but word has {word} letters")]
    LengthMismatch { partition: usize, word: usize },

    #[error("block {0} has the imaginary block as nearest outer")]
    NoOuterBlock(usize),

    #[error("partition is not adapted to the word")]
    NotAdapted,

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("invalid variance profile: {0}")]
    InvalidProfile(String),

    #[error("invalid poset: {0}")]
    InvalidPoset(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub(crate) fn check_limit(what: &'static str, value: usize, limit: usize) -> Result<()> {
    if value > limit {
        Err(Error::LimitExceeded { what, value, limit })
    } else {
        Ok(())
    }
}
