//! Operator augmentation for elliptic linear systems observed under noise.
//!
//! Given one noisy observation `Â` of an SPD operator `A`, the naive solve
//! `Â⁻¹b` overshoots `A⁻¹b` on average. The estimators in [`augmentation`]
//! pick a scalar `β` from bootstrap resamples of the noise model and return
//! `(Â⁻¹ − βK̂)b` instead, which has lower mean-squared error.
//!
//! Layout:
//!
//! * [`linalg`]: SPD operators, skyline Cholesky, probe sampling, power method.
//! * [`noise`]: multiplicative edge-weight noise families and exact ensembles.
//! * [`problems`]: Poisson grids, graph Laplacians, shifted Laplacians.
//! * [`augmentation`]: windows, Neumann series terms, the estimators.
//! * [`oracle`]: dense enumeration of exact factors and lemma checks.
//! * [`evaluation`]: the Monte-Carlo benchmark harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod augmentation;
pub mod error;
pub mod evaluation;
pub mod linalg;
pub mod noise;
pub mod oracle;
pub mod problems;
pub mod rng;

pub use error::{Error, Result};
