use nalgebra::{DMatrix, SymmetricEigen};

use crate::{Error, Result};

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// `f(M)` for symmetric `M` via its eigendecomposition.
pub(crate) fn sym_fn(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(symmetrize(m.clone()));
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    symmetrize(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

pub(crate) fn sqrt_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    sym_fn(m, |x| x.max(0.0).sqrt())
}

pub(crate) fn inv_sqrt_spd(m: &DMatrix<f64>) -> DMatrix<f64> {
    sym_fn(m, |x| 1.0 / x.sqrt())
}

pub(crate) fn inverse_spd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = nalgebra::Cholesky::new(symmetrize(m.clone()))
        .ok_or(Error::NotPositiveDefinite { pivot: 0, value: f64::NAN })?;
    Ok(symmetrize(chol.inverse()))
}

pub(crate) fn eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    SymmetricEigen::new(symmetrize(m.clone())).eigenvalues.iter().copied().collect()
}

pub(crate) fn min_eig(m: &DMatrix<f64>) -> f64 {
    eigenvalues(m).into_iter().fold(f64::INFINITY, f64::min)
}

pub(crate) fn max_eig(m: &DMatrix<f64>) -> f64 {
    eigenvalues(m).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// `tr(A B)` without forming the product.
pub(crate) fn trace_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.transpose().iter()).map(|(x, y)| x * y).sum()
}
