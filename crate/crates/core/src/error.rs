use std::io;

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no inverse: zero has no multiplicative inverse")]
    NoInverse,

    #[error("{0} is not a primitive polynomial of degree {1}")]
    NotPrimitive(u32, u32),

    #[error("generator not full rank (rank {rank}, expected {expected})")]
    NotFullRank { rank: usize, expected: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid permutation of 0..{0}")]
    InvalidPermutation(usize),

    #[error("degenerate channel configuration: {0}")]
    DegenerateChannel(String),

    #[error("code {0} is not byte aligned")]
    NotByteAligned(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    #[error("prior protocol error: {0}")]
    Protocol(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("tep count overflows 64 bits")]
    Overflow,

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
