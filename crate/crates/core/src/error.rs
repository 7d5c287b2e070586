use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown relation token `{0}`")]
    UnknownRelation(String),
    #[error("sort error: {0}")]
    Sort(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("data error: {0}")]
    Data(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
