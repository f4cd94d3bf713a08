use thiserror::Error;

/// Errors raised by the numerical layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("{op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// An iterative solver did not reach its tolerance.
    #[error("{op}: no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        op: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// A table would exceed the configured memory budget.
    #[error("{op}: table needs {needed} bytes, budget is {budget} bytes")]
    Memory { op: &'static str, needed: u64, budget: u64 },

    /// A request is too large for an exhaustive method.
    #[error("{op}: size {size} exceeds limit {limit}")]
    Size {
        op: &'static str,
        size: usize,
        limit: usize,
    },

    /// Input text that does not follow the documented layout.
    #[error("{op}: malformed input: {detail}")]
    Format { op: &'static str, detail: String },

    /// Internal inconsistency between two routes that must agree.
    #[error("{op}: {detail}")]
    Inconsistent { op: &'static str, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        op,
        detail: detail.into(),
    }
}
