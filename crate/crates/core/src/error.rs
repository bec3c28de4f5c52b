use thiserror::Error;

use crate::metric_enum::BallTable;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Raw word input contained a character outside `{a, A, t, T}`.
    #[error("unrecognized letter {ch:?} at position {pos}")]
    Parse { pos: usize, ch: char },

    /// An operation was called outside its domain (e.g. `psi` on an element not in G').
    #[error("domain error: {0}")]
    Domain(String),

    /// A table lookup fell outside the radius the table was built for.
    #[error("element {word} is outside the table radius {radius}")]
    OutOfRange { word: String, radius: u32 },

    /// Enumeration hit its candidate budget. The table holds every completed radius.
    #[error("resource limit exceeded: {candidates} candidates requested, cap is {cap}")]
    ResourceLimit {
        candidates: u64,
        cap: u64,
        partial: Box<BallTable>,
    },

    #[error("no such value below the search limit: {0}")]
    NotFound(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("cache file version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("corrupt cache file: {0}")]
    Corrupt(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
