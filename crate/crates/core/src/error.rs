use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed statement: {0}")]
    MalformedStatement(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid task: {0}")]
    InvalidTask(String),

    #[error("resource limit exceeded: {what} (cap {cap})")]
    ResourceLimit { what: String, cap: u64 },

    #[error("no explanation: {0}")]
    NoExplanation(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(String),
}

/// Broad outcome classes, used for process exit codes and C error codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Io,
    Parse,
    Domain,
    ResourceLimit,
    NotApplicable,
    Internal,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. } => ErrorKind::Parse,
            Error::MalformedStatement(_)
            | Error::Domain(_)
            | Error::InvalidTask(_)
            | Error::NoExplanation(_)
            | Error::Protocol(_) => ErrorKind::Domain,
            Error::ResourceLimit { .. } => ErrorKind::ResourceLimit,
            Error::NotApplicable(_) => ErrorKind::NotApplicable,
            Error::Internal(_) => ErrorKind::Internal,
            Error::Io(_) => ErrorKind::Io,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Prefixes the message with step or entity context, keeping the variant.
    pub fn context(self, ctx: impl std::fmt::Display) -> Self {
        match self {
            Error::MalformedStatement(m) => Error::MalformedStatement(format!("{ctx}: {m}")),
            Error::Domain(m) => Error::Domain(format!("{ctx}: {m}")),
            Error::InvalidTask(m) => Error::InvalidTask(format!("{ctx}: {m}")),
            Error::ResourceLimit { what, cap } => Error::ResourceLimit {
                what: format!("{ctx}: {what}"),
                cap,
            },
            Error::NoExplanation(m) => Error::NoExplanation(format!("{ctx}: {m}")),
            Error::NotApplicable(m) => Error::NotApplicable(format!("{ctx}: {m}")),
            Error::Protocol(m) => Error::Protocol(format!("{ctx}: {m}")),
            Error::Parse { location, message } => Error::Parse {
                location: format!("{ctx}: {location}"),
                message,
            },
            Error::Internal(m) => Error::Internal(format!("{ctx}: {m}")),
            Error::Io(m) => Error::Io(format!("{ctx}: {m}")),
        }
    }
}
