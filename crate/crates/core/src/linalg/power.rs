use rand::Rng;
use rand_distr::StandardNormal;

use super::{dot, Factorization, SpdOperator};
use crate::{Error, Result};

/// Stopping rule for [`generalized_spectral_norm`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerOptions {
    /// Relative change between successive ratio iterates.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 200 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralNormEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest eigenvalue of the pencil `(num, den)`, i.e. `‖den^{-1/2} num den^{-1/2}‖₂`.
///
/// Iterates `v_k = num · den⁻¹ v_{k-1}` and returns the ratio
/// `‖v_k‖_{den⁻¹} / ‖v_{k-1}‖_{den⁻¹}`, which increases monotonically
/// towards the answer. Only solves against `den` are needed.
pub fn generalized_spectral_norm<R: Rng + ?Sized>(
    num: &SpdOperator,
    den: &Factorization,
    opts: PowerOptions,
    rng: &mut R,
) -> Result<SpectralNormEstimate> {
    let n = num.dim();
    if den.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: den.dim() });
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("power method tolerance {}", opts.tol)));
    }
    let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let mut s = den.solve(&v)?;
    let norm0 = dot(&v, &s).sqrt();
    if !(norm0 > 0.0 && norm0.is_finite()) {
        return Err(Error::NonFinite("power method start vector"));
    }
    v.iter_mut().for_each(|x| *x /= norm0);
    s.iter_mut().for_each(|x| *x /= norm0);

    let mut ratio = 0.0;
    let mut w = vec![0.0; n];
    for k in 1..=opts.max_iter {
        num.apply_into(&s, &mut w)?;
        den.solve_into(&w, &mut s)?;
        let next = dot(&w, &s).sqrt();
        if !next.is_finite() {
            return Err(Error::NonFinite("power method iterate"));
        }
        if next == 0.0 {
            return Ok(SpectralNormEstimate { value: 0.0, iterations: k, converged: true });
        }
        let change = (next - ratio).abs();
        ratio = next;
        w.iter().zip(v.iter_mut()).for_each(|(a, b)| *b = a / next);
        s.iter_mut().for_each(|x| *x /= next);
        if k > 1 && change <= opts.tol * ratio {
            return Ok(SpectralNormEstimate { value: ratio, iterations: k, converged: true });
        }
    }
    Ok(SpectralNormEstimate { value: ratio, iterations: opts.max_iter, converged: false })
}
