use thiserror::Error;

/// Errors raised anywhere in the signature stack.
///
/// Validation failures carry the name of the offending parameter so that
/// front ends can report it verbatim.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{param}`: {reason}")]
    InvalidParameter { param: &'static str, reason: String },

    #[error("width mismatch for {what}: expected {expected} bits, got {actual}")]
    WidthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("duplicate key id (origin {origin}, slot {slot})")]
    DuplicateKeyId { origin: u32, slot: u32 },

    #[error("malformed signature: {0}")]
    MalformedSignature(String),

    #[error("no k <= 2^32 reaches target probability {p_target:e}")]
    Unsolvable { p_target: f64 },

    #[error("forwarding chain of {requested} hops exceeds the {available} available levels")]
    ChainTooLong { requested: usize, available: usize },

    #[error("network config: {0}")]
    Config(String),

    #[error("unknown link between users {0} and {1}")]
    UnknownLink(u32, u32),
}

impl Error {
    pub(crate) fn invalid(param: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            param,
            reason: reason.into(),
        }
    }

    /// `true` for errors caused by bad user input rather than runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::WidthMismatch { .. }
                | Error::Config(_)
                | Error::ChainTooLong { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
