use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit: {what} needs {requested} entries, budget is {budget}")]
    ResourceLimit {
        what: &'static str,
        requested: u64,
        budget: u64,
    },

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error(transparent)]
    Cache(#[from] CacheError),
}

/// Failures reading or writing the binary table caches.
#[derive(Debug, Error)]
pub enum CacheError {
    #[error("bad magic bytes: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("unsupported cache format version {found} (expected {expected})")]
    UnsupportedVersion { expected: u32, found: u32 },

    #[error("cache truncated: {0}")]
    Truncated(String),

    #[error("cache payload corrupt: {0}")]
    Corrupt(String),

    #[error("cache i/o: {0}")]
    Io(#[from] io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
