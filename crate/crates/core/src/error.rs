//! Error type shared by all library modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("letter index {index} exceeds alphabet rank {rank}")]
    AlphabetMismatch { index: u32, rank: u32 },

    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: u32, right: u32 },

    #[error("graph is not connected")]
    Disconnected,

    #[error("graph has no basepoint")]
    MissingBasepoint,

    #[error("graph is not folded")]
    NotFolded,

    #[error("graph pair is not tight")]
    NotTight,

    #[error("edges {0} and {1} are not a foldable pair")]
    NotFoldable(usize, usize),

    #[error("a subgraph fold is available; fold X first")]
    SubgraphFoldAvailable,

    #[error("factor letter sets overlap")]
    OverlappingFactors,

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("endomorphism is not injective")]
    NotInjective,

    #[error("cap exceeded: {0}")]
    CapExceeded(String),

    #[error("empty word not allowed here")]
    EmptyWord,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
