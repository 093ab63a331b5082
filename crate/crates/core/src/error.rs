use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tree too large: {0} leaves requested")]
    SizeOverflow(u128),

    #[error("invalid branching profile: {0}")]
    InvalidProfile(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("level {level} out of range (depth {depth})")]
    LevelOutOfRange { level: usize, depth: usize },

    #[error("atom {0} does not belong to this tree")]
    ForeignAtom(usize),

    #[error("function/tree mismatch: {0}")]
    Mismatch(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("resolution failure: {0}")]
    Resolution(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
