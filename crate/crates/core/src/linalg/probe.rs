use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Auto-correlation `Λ` of probe vectors, stored as a factor `F` with
/// `F Fᵀ = Λ`.
///
/// The factor comes from a diagonally pivoted Cholesky decomposition, which
/// also handles semidefinite `Λ` (the factor then has fewer columns than rows).
#[derive(Clone, Debug)]
pub struct ProbeCorrelation {
    n: usize,
    factor: Option<DMatrix<f64>>,
}

impl ProbeCorrelation {
    /// `Λ = I`; probes are plain standard normal vectors.
    pub fn identity(n: usize) -> Self {
        Self { n, factor: None }
    }

    pub fn new(lambda: &DMatrix<f64>) -> Result<Self> {
        let n = lambda.nrows();
        if lambda.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: lambda.ncols() });
        }
        Ok(Self { n, factor: Some(pivoted_cholesky(lambda)?) })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Rank of the stored factor.
    pub fn rank(&self) -> usize {
        self.factor.as_ref().map_or(self.n, |f| f.ncols())
    }

    /// `F Fᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        match &self.factor {
            None => DMatrix::identity(self.n, self.n),
            Some(f) => f * f.transpose(),
        }
    }

    /// Draws `q = F z` with `z` i.i.d. standard normal.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.factor {
            None => (0..self.n).map(|_| rng.sample(StandardNormal)).collect(),
            Some(f) => {
                let z: Vec<f64> = (0..f.ncols()).map(|_| rng.sample(StandardNormal)).collect();
                (0..self.n)
                    .map(|i| f.row(i).iter().zip(&z).map(|(a, b)| a * b).sum())
                    .collect()
            }
        }
    }
}

fn pivoted_cholesky(lambda: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = lambda.nrows();
    let scale = lambda.amax();
    if !scale.is_finite() {
        return Err(Error::NonFinite("probe correlation"));
    }
    let tol = scale * n as f64 * f64::EPSILON * 16.0;
    let mut residual: Vec<f64> = (0..n).map(|i| lambda[(i, i)]).collect();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut used = vec![false; n];
    loop {
        let pivot = (0..n)
            .filter(|&i| !used[i])
            .max_by(|&a, &b| residual[a].total_cmp(&residual[b]));
        let Some(p) = pivot else { break };
        let d = residual[p];
        if d <= tol {
            if d < -tol.max(1e-10 * scale) {
                return Err(Error::InvalidParameter(
                    "probe correlation is not positive semidefinite".into(),
                ));
            }
            break;
        }
        used[p] = true;
        let root = d.sqrt();
        let mut col = vec![0.0; n];
        for i in 0..n {
            if used[i] && i != p {
                continue;
            }
            let mut v = lambda[(i, p)];
            for c in &columns {
                v -= c[i] * c[p];
            }
            col[i] = if i == p { root } else { v / root };
        }
        for i in 0..n {
            if !used[i] {
                residual[i] -= col[i] * col[i];
            }
        }
        columns.push(col);
    }
    let mut f = DMatrix::zeros(n, columns.len());
    for (j, c) in columns.iter().enumerate() {
        for i in 0..n {
            f[(i, j)] = c[i];
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn rel_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn zero_correlation_gives_zero_probes() {
        let c = ProbeCorrelation::new(&DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(c.rank(), 0);
        let mut rng = seeded(1);
        for _ in 0..5 {
            assert_eq!(c.sample(&mut rng), vec![0.0; 3]);
        }
    }

    #[test]
    fn factor_reproduces_definite_and_semidefinite_inputs() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0]);
        let c = ProbeCorrelation::new(&a).unwrap();
        assert_eq!(c.rank(), 3);
        assert!(rel_frobenius(&c.reconstruct(), &a) < 1e-10);

        // rank 2: v1 v1ᵀ + v2 v2ᵀ
        let v1 = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, 0.0, -1.0]);
        let v2 = DMatrix::from_column_slice(4, 1, &[0.5, -1.0, 3.0, 0.0]);
        let l = &v1 * v1.transpose() + &v2 * v2.transpose();
        let c = ProbeCorrelation::new(&l).unwrap();
        assert_eq!(c.rank(), 2);
        assert!(rel_frobenius(&c.reconstruct(), &l) < 1e-10);
    }

    #[test]
    fn rejects_indefinite() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(ProbeCorrelation::new(&a).is_err());
    }

    #[test]
    fn empirical_covariance_converges() {
        let mut rng = seeded(11);
        let c = ProbeCorrelation::identity(3);
        let m = 100_000;
        let mut cov = DMatrix::<f64>::zeros(3, 3);
        for _ in 0..m {
            let q = DMatrix::from_column_slice(3, 1, &c.sample(&mut rng));
            cov += &q * q.transpose();
        }
        cov /= m as f64;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((cov[(i, j)] - target).abs() <= 0.05, "{cov}");
            }
        }

        let c = ProbeCorrelation::new(&DMatrix::from_element(1, 1, 4.0)).unwrap();
        let var = (0..m).map(|_| c.sample(&mut rng)[0].powi(2)).sum::<f64>() / m as f64;
        assert!((3.8..=4.2).contains(&var), "{var}");
    }

    #[test]
    fn same_seed_same_probe() {
        let c = ProbeCorrelation::new(&DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        let a = c.sample(&mut seeded(5));
        let b = c.sample(&mut seeded(5));
        assert_eq!(a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    }
}
