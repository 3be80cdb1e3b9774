//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the numerical layers.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// A parameter is outside its mathematical domain (p <= 1, R1 >= R2, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An iteration failed to reach its tolerance or a step size collapsed.
    /// Carries the last trustworthy abscissa and state for diagnostics.
    #[error("numeric error: {context} (last r = {r:.6e}, state = {state:?})")]
    Numeric {
        context: String,
        r: f64,
        state: Vec<f64>,
    },

    /// A search exhausted its range without finding the requested object.
    #[error("not found: {0}")]
    NotFound(String),

    /// A probe could not decide between admissible alternatives.
    #[error("inconclusive: {0}")]
    Inconclusive(String),

    /// Two independent computations of the same quantity disagree beyond
    /// tolerance; indicates an internal bug or an unusable configuration.
    #[error("consistency error: {0}")]
    Consistency(String),
}

impl CoreError {
    pub fn domain(msg: impl Into<String>) -> Self {
        CoreError::Domain(msg.into())
    }

    pub fn numeric(context: impl Into<String>, r: f64, state: &[f64]) -> Self {
        CoreError::Numeric {
            context: context.into(),
            r,
            state: state.to_vec(),
        }
    }

    pub fn not_found(msg: impl Into<String>) -> Self {
        CoreError::NotFound(msg.into())
    }

    pub fn inconclusive(msg: impl Into<String>) -> Self {
        CoreError::Inconclusive(msg.into())
    }

    pub fn consistency(msg: impl Into<String>) -> Self {
        CoreError::Consistency(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
