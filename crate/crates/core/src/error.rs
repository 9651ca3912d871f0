use thiserror::Error;

use crate::word::Word;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("letter {letter} is outside rank {rank}")]
    MalformedLetter { letter: String, rank: usize },

    #[error("group mismatch: {0}")]
    GroupMismatch(String),

    #[error("ball exceeded the cap of {cap} elements")]
    BallOverflow { cap: usize },

    #[error("support exceeded the cap of {cap} entries")]
    SupportOverflow { cap: usize },

    #[error(
        "relator of length {relator_len} violates C'(1/6): piece {piece} has length {}",
        piece.len()
    )]
    SmallCancellation { piece: Word, relator_len: usize },

    #[error("power iteration did not converge after {iterations} iterations (last estimate {last})")]
    NonConvergence { last: f64, iterations: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("group is not amenable: {0}")]
    NotAmenable(String),

    #[error("cocycle value alpha({s}, {p}) = {alpha} {reason}")]
    CocycleOutside {
        s: Word,
        p: Word,
        alpha: Word,
        reason: &'static str,
    },

    #[error("search exceeded the cap n = {cap}")]
    SearchCap { cap: usize },

    #[error("mean is not tabulated at {0}")]
    NotTabulated(Word),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }

    /// True for the cap-exceeded family of errors.
    pub fn is_cap(&self) -> bool {
        matches!(
            self,
            Error::BallOverflow { .. } | Error::SupportOverflow { .. } | Error::SearchCap { .. }
        )
    }
}
