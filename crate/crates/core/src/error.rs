use thiserror::Error;

/// Failure modes shared by every module.
///
/// The variants follow the exit-code taxonomy of the command line tool:
/// input-like errors, resource limits, and invariant violations (a lemma
/// check that came out false) are kept apart.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub fn not_found(msg: impl Into<String>) -> Self {
        Error::NotFound(msg.into())
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::InvariantViolation(msg.into())
    }

    /// Process exit code: 2 for input-like errors, 3 for resource limits and
    /// exhausted searches, 4 for invariant violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_)
            | Error::Domain(_)
            | Error::Precondition(_)
            | Error::Unsupported(_) => 2,
            Error::Resource(_) | Error::NotFound(_) => 3,
            Error::InvariantViolation(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Input(_) => "input",
            Error::Domain(_) => "domain",
            Error::Precondition(_) => "precondition",
            Error::Unsupported(_) => "unsupported",
            Error::Resource(_) => "resource",
            Error::NotFound(_) => "not-found",
            Error::InvariantViolation(_) => "invariant-violation",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
