use thiserror::Error;

/// Failures of pointwise model evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("domain error: {input} must be positive and finite (got {value})")]
    Domain { input: &'static str, value: f64 },

    /// The outer bracket is not strictly positive, so `bracket^(-1/p)` is undefined.
    #[error("non-positive bracket ({bracket}) at K = {k}, L = {l}")]
    NonPositiveBracket { bracket: f64, k: f64, l: f64 },

    #[error("marginal product of {input} is zero; MRTS is undefined")]
    ZeroMarginalProduct { input: &'static str },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("parameters do not satisfy the {form} constraint: {reason}")]
    FormMismatch { form: &'static str, reason: String },
}
