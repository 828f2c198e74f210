//! SPD operators and the factorization-backed machinery built on them.

mod cholesky;
mod csr;
mod operator;
mod power;
mod probe;

pub use cholesky::{factorize, Factorization};
pub use csr::CsrMatrix;
pub use operator::SpdOperator;
pub use power::{generalized_spectral_norm, PowerOptions, SpectralNormEstimate};
pub use probe::ProbeCorrelation;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
