//! Nested three-input production function
//!
//! ```text
//! V(K, L) = A * [ sigma * h^(-p/q) + (1 - sigma) * (K/L)^(-p) ]^(-1/p)
//! h(K, L) = delta * K^(-q) + (1 - delta) * L^(-q)
//! ```
//!
//! The crate evaluates the function and its analytic derivatives, audits
//! published closed forms against those derivatives, scans regions for
//! positivity, homogeneity, concavity and monotonicity, and calibrates the
//! five parameters to `(K, L, V)` panels by multistart Nelder-Mead.
//!
//! Modules:
//! - [`model`]: pointwise evaluation, gradient, elasticities, Hessian,
//!   special-case reductions and the formula audit.
//! - [`diagnostics`]: region scans assembled into a [`diagnostics::DiagnosticsReport`].
//! - [`estimation`]: residuals, fit statistics and the multistart fitter.
//! - [`data_io`]: panel CSV, synthetic panels and JSON report documents.
//! - [`rng`]: the counter-based generator every randomized routine draws from.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data_io;
pub mod diagnostics;
pub mod error;
pub mod estimation;
pub mod model;
pub mod rng;

pub use error::ModelError;
pub use model::{InputPoint, Parameters};
