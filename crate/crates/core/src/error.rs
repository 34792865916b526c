use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("generator index {index} out of range for rank {rank}")]
    GeneratorOutOfRange { index: usize, rank: usize },

    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },

    #[error("map is not an endomorphism (domain rank {domain}, codomain rank {codomain})")]
    NotEndomorphism { domain: usize, codomain: usize },

    #[error("parse error at position {position}: {message}\n  {input}\n  {marker}^")]
    Parse {
        input: String,
        position: usize,
        message: String,
        marker: String,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("elements belong to different Hall bases")]
    BasisMismatch,

    #[error("nilpotency class {requested} exceeds the configured cap {cap}")]
    Complexity { requested: u32, cap: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error("output stream closed")]
    OutputClosed,
}

impl Error {
    pub(crate) fn parse(input: &str, position: usize, message: impl Into<String>) -> Self {
        let marker = " ".repeat(input[..position.min(input.len())].chars().count());
        Error::Parse {
            input: input.to_string(),
            position,
            message: message.into(),
            marker,
        }
    }
}
