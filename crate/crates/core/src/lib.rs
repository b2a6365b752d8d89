//! Support-set recovery for Bernoulli-Gaussian sparse signals observed through
//! a noisy random linear map `y = A x + e`.
//!
//! The crate is `no_std` (it needs `alloc`) and holds the whole numerical
//! pipeline: dense kernels, the generative model, the cardinality-constrained
//! MAP estimator, closed-form recovery bounds, recovery metrics and a
//! sequential Monte Carlo driver. File formats, the CLI and the parallel
//! runner live in `sparsemap-cli`.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
mod combinations;
mod error;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod solver;

pub use combinations::{binomial, Combinations};
pub use error::{Error, Result};
pub use linalg::{DenseMatrix, ThinSvd};
pub use model::{Instance, ModelParams, RipEstimate, RipMode, SparseSignal};
