use thiserror::Error;

/// Errors raised by table maintenance, generation and verification.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{0} is already an element of the set")]
    DuplicateElement(u64),

    #[error("elements must be positive integers, got {0}")]
    NonPositiveElement(u64),

    #[error("64-bit overflow while {0}; lower n or h")]
    Overflow(&'static str),

    #[error("sum tables would hold {needed} entries, above the cap of {cap}")]
    MemoryCapExceeded { needed: usize, cap: usize },

    #[error("enumeration of {needed} multisets exceeds the limit of {limit}")]
    EnumerationLimit { needed: u128, limit: u128 },

    #[error("window scan of {needed} work units exceeds the budget of {limit}")]
    ScanBudgetExceeded { needed: u128, limit: u128 },

    /// No admissible candidate at or below the proven ceiling. The greedy
    /// growth bound rules this out, so it always indicates a bug.
    #[error("no admissible candidate for a_{n} at or below the proven ceiling {ceiling}")]
    ScanExceededBound { n: usize, ceiling: u64 },

    #[error("no admissible candidate for a_{n} at or below the configured ceiling {ceiling}")]
    ScanExceededConfiguredLimit { n: usize, ceiling: u64 },

    #[error("time limit of {limit_ms} ms reached before generating a_{n}")]
    TimeLimitExceeded { n: usize, limit_ms: u64 },

    #[error("terms must be pairwise distinct; {0} repeats")]
    RepeatedTerm(u64),
}

pub type Result<T> = std::result::Result<T, Error>;
