use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{x} is not invertible modulo {r}")]
    NotInvertible { x: i64, r: i64 },

    #[error("orientation {a} is not coprime to index {r}")]
    NotCoprime { a: i64, r: i64 },

    #[error("Fano index {q} is not coprime to point index {r}")]
    IndexNotCoprime { q: i64, r: i64 },

    #[error("chi({0}) is not an integer")]
    NonIntegralChi(i64),

    #[error("no candidate of index {q} with genus >= {genus_min}")]
    NoCandidate { q: i64, genus_min: i64 },

    #[error("database has no candidates of index {0}")]
    IncompleteDatabase(i64),

    #[error("unknown {0:?} has no finite bound")]
    UnboundedCase(String),

    #[error("invalid case: {0}")]
    InvalidCase(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
