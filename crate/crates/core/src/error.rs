use thiserror::Error;

/// Errors produced by the numeric kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A floor/fractional-part decision could not be certified at any
    /// precision the input can supply (or below the configured cap).
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("memory budget exceeded: need {needed} bytes, budget is {budget} bytes")]
    MemoryBudgetExceeded { needed: u64, budget: u64 },

    /// Work bound (e.g. `H * x` for the naive double sum) exceeded.
    #[error("work budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("invalid smoothing width: {0}")]
    InvalidDelta(String),

    #[error("rational input where an irrational number is required: {0}")]
    RationalInput(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// Least-squares fit on too few usable points.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
