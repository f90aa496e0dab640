use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    /// The exact MMS search refuses queries above its configured item budget.
    #[error("oracle budget exceeded: {items} items, budget {budget}")]
    OracleBudgetExceeded { items: usize, budget: usize },

    /// Exhaustive enumeration (violator search, brute-force verification)
    /// refused an input too large for its budget.
    #[error("enumeration budget exceeded: {0}")]
    EnumerationBudgetExceeded(String),

    /// An agent has MMS 0 (all her costs are zero) in a configuration the
    /// solver cannot satisfy. Reported before solving.
    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    /// A bound the theorems guarantee failed post-hoc; this signals a bug,
    /// never a property of the input.
    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
