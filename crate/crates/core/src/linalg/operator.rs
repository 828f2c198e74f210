use nalgebra::DMatrix;

use super::CsrMatrix;
use crate::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
enum Storage {
    Dense(DMatrix<f64>),
    Sparse(CsrMatrix),
}

/// A symmetric matrix that is expected to be positive definite.
///
/// Symmetry is checked on construction. Definiteness is only checked when the
/// operator is factorized.
#[derive(Clone, Debug)]
pub struct SpdOperator {
    storage: Storage,
}

impl SpdOperator {
    pub fn from_dense(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        let scale = m.amax();
        if scale > 0.0 {
            let asymmetry = (&m - m.transpose()).amax() / scale;
            if asymmetry > SYMMETRY_TOL {
                return Err(Error::NotSymmetric { asymmetry });
            }
        }
        Ok(Self { storage: Storage::Dense(m) })
    }

    pub fn from_csr(m: CsrMatrix) -> Result<Self> {
        let asymmetry = m.asymmetry();
        if asymmetry > SYMMETRY_TOL {
            return Err(Error::NotSymmetric { asymmetry });
        }
        Ok(Self { storage: Storage::Sparse(m) })
    }

    /// Wraps a matrix whose symmetry holds by construction.
    pub(crate) fn from_csr_unchecked(m: CsrMatrix) -> Self {
        Self { storage: Storage::Sparse(m) }
    }

    /// Symmetric operator from a row-major slice.
    pub fn from_row_slice(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: data.len() });
        }
        Self::from_dense(DMatrix::from_row_slice(n, n, data))
    }

    pub fn identity(n: usize) -> Self {
        Self { storage: Storage::Sparse(CsrMatrix::identity(n)) }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let triplets: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self { storage: Storage::Sparse(CsrMatrix::from_triplets(d.len(), &triplets)) }
    }

    pub fn scalar(v: f64) -> Self {
        Self::diagonal(&[v])
    }

    pub fn dim(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.nrows(),
            Storage::Sparse(m) => m.dim(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub(crate) fn as_csr(&self) -> Option<&CsrMatrix> {
        match &self.storage {
            Storage::Sparse(m) => Some(m),
            Storage::Dense(_) => None,
        }
    }

    pub(crate) fn as_dense(&self) -> Option<&DMatrix<f64>> {
        match &self.storage {
            Storage::Dense(m) => Some(m),
            Storage::Sparse(_) => None,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m[(i, j)],
            Storage::Sparse(m) => m.get(i, j),
        }
    }

    /// `y = self · x`.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: x.len() });
        }
        if y.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: y.len() });
        }
        match &self.storage {
            Storage::Sparse(m) => m.matvec_into(x, y),
            Storage::Dense(m) => {
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi = m.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.dim()];
        self.apply_into(x, &mut y)?;
        Ok(y)
    }

    /// `xᵀ · self · x`.
    pub fn quad_form(&self, x: &[f64]) -> Result<f64> {
        Ok(super::dot(x, &self.apply(x)?))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(m) => m.to_dense(),
        }
    }
}
