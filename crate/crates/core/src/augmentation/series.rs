use crate::linalg::{dot, Factorization, SpdOperator};
use crate::{Error, Result};

/// Neumann series terms `t_k = α⁻ᵏ qᵀ A⁻¹ ((αA − Â) A⁻¹)ᵏ q` for
/// `k = 0..=n_max`, where `A` is the factorized base and `Â` the sample.
pub fn series_terms(
    base: &Factorization,
    sample: &SpdOperator,
    q: &[f64],
    n_max: usize,
    alpha: f64,
) -> Result<Vec<f64>> {
    let n = base.dim();
    if sample.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: sample.dim() });
    }
    if q.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: q.len() });
    }
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::InvalidShift(alpha));
    }
    let mut v = base.solve(q)?;
    let mut terms = Vec::with_capacity(n_max + 1);
    terms.push(dot(q, &v));
    let mut w = vec![0.0; n];
    let mut s = vec![0.0; n];
    for _ in 0..n_max {
        sample.apply_into(&v, &mut w)?;
        base.solve_into(&w, &mut s)?;
        v.iter_mut().zip(&s).for_each(|(a, b)| *a -= b / alpha);
        let t = dot(q, &v);
        if !t.is_finite() {
            return Err(Error::NonFinite("series term"));
        }
        terms.push(t);
    }
    Ok(terms)
}
