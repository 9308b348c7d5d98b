use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid tile: {0}")]
    InvalidTile(String),
    #[error("order {order} exceeds the maximum supported order {max}")]
    OrderTooLarge { order: u32, max: u32 },
    #[error("order mismatch: {0}")]
    OrderMismatch(String),
    #[error("no friends of unit square")]
    NoFriends,
    #[error("digit position must be at least 1, got {0}")]
    DigitPosition(u32),
    #[error("tiles {0} and {1} do not form a chain: {2}")]
    NotAChain(String, String, String),
    #[error("oracle scale exceeded: {0}")]
    OracleScale(String),
    #[error("exhaustive scale exceeded: {0}")]
    ExhaustiveScale(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("precision exhausted: {0}")]
    Precision(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("malformed configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
