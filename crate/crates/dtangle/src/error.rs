use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("dangling endpoint {0}")]
    DanglingEndpoint(String),
    #[error("self-loop at {0}")]
    SelfLoop(String),
    #[error("vertex not found: {0}")]
    NotFound(String),
    #[error("unknown edge {0} -> {1}")]
    UnknownEdge(String, String),
    #[error("instance too large: {0}")]
    SizeGuard(String),
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("tangles are indistinguishable: {0} and {1}")]
    Indistinguishable(usize, usize),
    #[error("needs a wall certificate: {0}")]
    NeedsCertificate(String),
}

impl Error {
    /// Size and budget aborts are separated from malformed input so the CLI
    /// can map them to different exit codes.
    pub fn is_abort(&self) -> bool {
        matches!(self, Error::SizeGuard(_) | Error::Budget(_) | Error::NeedsCertificate(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
