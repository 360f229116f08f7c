use thiserror::Error;

/// Failures of the generation engines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("resource budget exceeded: {0}")]
    ResourceBudgetExceeded(String),
    #[error("window did not converge in interval {interval} (radius cap {cap})")]
    NonConvergence { interval: u64, cap: u32 },
    #[error("backbone step qualities could not be separated at {bits} bits (prime indices {a} and {b})")]
    QualityTie { a: usize, b: usize, bits: u32 },
}
