use thiserror::Error;

/// Errors raised by the engine. Every public operation reports through this type.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed call (empty input lists and the like).
    #[error("usage error: {0}")]
    Usage(String),

    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A chain without a cycle was queried past its prefix.
    #[error("depth exceeded: level {level} is beyond the prefix of length {prefix_len} and the chain has no cycle")]
    DepthExceeded { level: u64, prefix_len: usize },

    /// An intermediate modulus or product does not fit in 128 bits.
    #[error("arithmetic overflow while computing {0}")]
    Overflow(String),

    #[error("syntax error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    /// A chain-spec file that does not describe a valid chain.
    #[error("chain spec, line {line}, field `{field}`: {msg}")]
    ChainSpec { line: usize, field: String, msg: String },

    #[error("sort error on `{var}`: {msg}")]
    Sort { var: String, msg: String },

    /// The input is outside the fragment the engine decides.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A configured size cap was hit.
    #[error("resource limit: {0}")]
    Resource(String),

    /// A caller-checked side condition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An internal consistency check failed. Always a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn overflow(what: &str) -> Error {
    Error::Overflow(what.to_string())
}
