//! Augmentation-factor estimators and the augmented solve.
//!
//! Energy-norm estimators work with the series `t_k = α⁻ᵏ qᵀ Â⁻¹ ((αÂ − Âᵦ) Â⁻¹)ᵏ q`
//! where `Â` is the observed operator and `Âᵦ` a bootstrap sample.

mod estimators;
mod series;
mod spec;
mod window;

use std::sync::Arc;

pub use estimators::{
    estimate_ag, estimate_asteag, estimate_basic, estimate_eag, estimate_teag, estimate_with,
    AugmentationEstimate, BootstrapContext, Probes,
};
pub use series::series_terms;
pub use spec::{augmented_solve, Method, Weights};
pub use window::{window, window_bar, Window, WindowKind};

use crate::linalg::{Factorization, SpdOperator};
use crate::noise::BootstrapSource;
use crate::rng::Rng;
use crate::{Error, Result};

/// A method together with its bootstrap sample count and weight matrices.
#[derive(Clone, Debug)]
pub struct AugmentationSpec {
    method: Method,
    samples: usize,
    weights: Arc<Weights>,
}

impl AugmentationSpec {
    pub fn new(method: Method, samples: usize, weights: Arc<Weights>) -> Result<Self> {
        match method {
            Method::TeagSoft(0) | Method::TeagHard(0) | Method::AstEag(0) => return Err(Error::InvalidOrder(0)),
            _ => {}
        }
        let min = if method == Method::Basic { 2 } else { 1 };
        if samples < min {
            return Err(Error::InvalidParameter(format!("{method} needs at least {min} bootstrap samples")));
        }
        Ok(Self { method, samples, weights })
    }

    /// Identity weights of dimension `n`.
    pub fn with_identity(method: Method, samples: usize, n: usize) -> Result<Self> {
        Self::new(method, samples, Arc::new(Weights::identity(n)))
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    /// Estimates `β` from `samples` bootstrap draws of `source`. The samples
    /// are drawn first, then the probes, both from `rng`.
    pub fn estimate<S: BootstrapSource + ?Sized>(
        &self,
        observed: &SpdOperator,
        factor: &Factorization,
        source: &S,
        b: &[f64],
        rng: &mut Rng,
    ) -> Result<AugmentationEstimate> {
        if self.method == Method::Naive {
            return Ok(AugmentationEstimate::default());
        }
        if self.weights.dim() != observed.dim() {
            return Err(Error::DimensionMismatch { expected: observed.dim(), found: self.weights.dim() });
        }
        let ctx = BootstrapContext::draw(observed, factor, source, self.samples, rng)?;
        let probes = Probes::draw(&self.weights, self.samples, rng);
        estimate_with(self.method, &ctx, &self.weights, &probes, b)
    }

    /// `(Â⁻¹ − βK̂) b`.
    pub fn solve(&self, factor: &Factorization, beta: f64, b: &[f64]) -> Result<Vec<f64>> {
        augmented_solve(factor, self.method, &self.weights, beta, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::factorize;
    use crate::noise::DiscreteEnsemble;
    use crate::rng::seeded;

    fn scalar_setup() -> (SpdOperator, Factorization, DiscreteEnsemble) {
        let a = SpdOperator::scalar(1.0);
        let f = factorize(&a).unwrap();
        let e = DiscreteEnsemble::uniform(vec![SpdOperator::scalar(0.5), SpdOperator::scalar(1.5)]).unwrap();
        (a, f, e)
    }

    #[test]
    fn degenerate_source_gives_zero() {
        let a = SpdOperator::from_row_slice(2, &[2.0, -1.0, -1.0, 2.0]).unwrap();
        let f = factorize(&a).unwrap();
        let source = DiscreteEnsemble::degenerate(a.clone());
        let methods = [
            Method::Basic,
            Method::Ag,
            Method::Eag,
            Method::TeagSoft(2),
            Method::TeagHard(1),
            Method::AstEag(3),
        ];
        for m in methods {
            let spec = AugmentationSpec::with_identity(m, 10, 2).unwrap();
            let est = spec.estimate(&a, &f, &source, &[1.0, -2.0], &mut seeded(1)).unwrap();
            assert!(est.beta.abs() < 1e-12, "{m}: {}", est.beta);
            if m == Method::AstEag(3) {
                assert!(est.alphas.iter().all(|&x| (x - 1.0).abs() < 1e-9));
            }
        }
    }

    #[test]
    fn scalar_estimates_approach_exact_values() {
        let (a, f, e) = scalar_setup();
        let expected = [
            (Method::Ag, 0.4),
            (Method::Eag, 0.4),
            (Method::TeagSoft(1), 0.1),
            (Method::TeagHard(1), 2.0 / 7.0),
            (Method::Basic, 0.2),
        ];
        for (m, value) in expected {
            let spec = AugmentationSpec::with_identity(m, 20_000, 1).unwrap();
            let est = spec.estimate(&a, &f, &e, &[1.0], &mut seeded(7)).unwrap();
            assert!((est.beta - value).abs() < 5.0 * est.std_error.max(1e-3), "{m}: {} vs {value}", est.beta);
        }
    }

    #[test]
    fn asteag_scalar_alphas_are_exact() {
        let (a, f, e) = scalar_setup();
        let spec = AugmentationSpec::with_identity(Method::AstEag(2), 50, 1).unwrap();
        let est = spec.estimate(&a, &f, &e, &[1.0], &mut seeded(3)).unwrap();
        assert!(est.alphas.iter().all(|&x| x == 1.0 || x == 1.5));
        assert_eq!(est.unconverged, 0);
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(matches!(AugmentationSpec::with_identity(Method::TeagSoft(0), 5, 1), Err(Error::InvalidOrder(0))));
        assert!(AugmentationSpec::with_identity(Method::Basic, 1, 1).is_err());
        assert!(AugmentationSpec::with_identity(Method::Eag, 0, 1).is_err());
    }

    #[test]
    fn estimates_are_deterministic() {
        let (a, f, e) = scalar_setup();
        let spec = AugmentationSpec::with_identity(Method::AstEag(3), 100, 1).unwrap();
        let x = spec.estimate(&a, &f, &e, &[1.0], &mut seeded(5)).unwrap();
        let y = spec.estimate(&a, &f, &e, &[1.0], &mut seeded(5)).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn context_reports_failed_sample() {
        let a = SpdOperator::identity(2);
        let f = factorize(&a).unwrap();
        let bad = SpdOperator::diagonal(&[1.0, 0.0]);
        let source = DiscreteEnsemble::degenerate(bad);
        let ctx = BootstrapContext::draw(&a, &f, &source, 3, &mut seeded(0)).unwrap();
        assert!(matches!(ctx.sample_factor(1), Err(Error::BootstrapSample { index: 1, .. })));
    }
}
