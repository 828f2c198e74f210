//! Multiplicative edge-weight noise and the operator distributions it induces.
//!
//! A noisy observation multiplies every edge weight by an independent draw
//! `ẑₑ` with mean 1. Bootstrap samples apply the same noise again to the
//! observed weights.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::{Distribution, Gamma};

use crate::linalg::SpdOperator;
use crate::problems::{Assembly, ProblemInstance};
use crate::rng::Rng;
use crate::{Error, Result};

/// Largest edge count accepted by [`MatrixFamily::make_discrete`].
pub const MAX_DISCRETE_EDGES: usize = 20;

/// Distribution of the per-edge multiplier `ẑₑ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseModel {
    /// `low` or `high` with probability ½ each.
    TwoPoint { low: f64, high: f64 },
    /// Gamma with the given mean and standard deviation.
    Gamma { mean: f64, std: f64 },
    /// `1/p` with probability `p`, otherwise 0.
    BernoulliKeep { p: f64 },
}

impl NoiseModel {
    /// The noiseless model, `ẑₑ = 1`.
    pub fn none() -> Self {
        Self::TwoPoint { low: 1.0, high: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::TwoPoint { low, high } => low > 0.0 && low <= high && high.is_finite(),
            Self::Gamma { mean, std } => mean > 0.0 && std > 0.0 && mean.is_finite() && std.is_finite(),
            Self::BernoulliKeep { p } => p > 0.0 && p <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("noise model {self}")))
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::TwoPoint { low, high } => 0.5 * (low + high),
            Self::Gamma { mean, .. } => mean,
            Self::BernoulliKeep { .. } => 1.0,
        }
    }

    /// Support points with their probabilities, merged and without zero-mass
    /// outcomes. Fails for continuous models.
    pub fn outcomes(&self) -> Result<Vec<(f64, f64)>> {
        match *self {
            Self::TwoPoint { low, high } if low == high => Ok(vec![(1.0, low)]),
            Self::TwoPoint { low, high } => Ok(vec![(0.5, low), (0.5, high)]),
            Self::BernoulliKeep { p: 1.0 } => Ok(vec![(1.0, 1.0)]),
            Self::BernoulliKeep { p } => Ok(vec![(p, 1.0 / p), (1.0 - p, 0.0)]),
            Self::Gamma { .. } => Err(Error::UnsupportedModel(self.to_string())),
        }
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::TwoPoint { low, high } if low == 1.0 && high == 1.0 => write!(f, "none"),
            Self::TwoPoint { low, high } => write!(f, "two-point:{low},{high}"),
            Self::Gamma { mean, std } => write!(f, "gamma:{mean},{std}"),
            Self::BernoulliKeep { p } => write!(f, "bernoulli:{p}"),
        }
    }
}

impl FromStr for NoiseModel {
    type Err = Error;

    /// Parses `none`, `two-point:LOW,HIGH`, `gamma:MEAN,STD` or `bernoulli:P`.
    fn from_str(s: &str) -> Result<Self> {
        let (tag, args) = s.split_once(':').unwrap_or((s, ""));
        let params = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| a.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| Error::Config(format!("invalid noise parameters in {s:?}")))?
        };
        let model = match (tag.trim(), params.as_slice()) {
            ("none", []) => Self::none(),
            ("two-point", &[low, high]) => Self::TwoPoint { low, high },
            ("gamma", &[mean, std]) => Self::Gamma { mean, std },
            ("bernoulli", &[p]) => Self::BernoulliKeep { p },
            _ => {
                return Err(Error::Config(format!(
                    "unknown noise spec {s:?} (expected none, two-point:LOW,HIGH, gamma:MEAN,STD or bernoulli:P)"
                )))
            }
        };
        model.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(model)
    }
}

#[derive(Clone, Debug)]
enum Sampler {
    TwoPoint(f64, f64),
    Gamma(Gamma<f64>),
    Bernoulli(f64),
}

impl Sampler {
    fn new(model: NoiseModel) -> Result<Self> {
        model.validate()?;
        Ok(match model {
            NoiseModel::TwoPoint { low, high } => Self::TwoPoint(low, high),
            NoiseModel::Gamma { mean, std } => {
                let shape = (mean / std).powi(2);
                let scale = std * std / mean;
                Self::Gamma(Gamma::new(shape, scale).map_err(|e| Error::InvalidParameter(e.to_string()))?)
            }
            NoiseModel::BernoulliKeep { p } => Self::Bernoulli(p),
        })
    }

    fn draw(&self, rng: &mut Rng) -> f64 {
        match self {
            Self::TwoPoint(low, high) => {
                if rng.random::<bool>() {
                    *high
                } else {
                    *low
                }
            }
            Self::Gamma(g) => g.sample(rng),
            Self::Bernoulli(p) => {
                if rng.random::<f64>() < *p {
                    1.0 / p
                } else {
                    0.0
                }
            }
        }
    }
}

/// Conditional distribution of operators given edge weights: weights are
/// perturbed by the noise model and assembled into the problem's operator.
#[derive(Clone, Debug)]
pub struct MatrixFamily {
    model: NoiseModel,
    sampler: Sampler,
    assembly: Arc<Assembly>,
}

impl MatrixFamily {
    pub fn new(model: NoiseModel, problem: &ProblemInstance) -> Result<Self> {
        Ok(Self { model, sampler: Sampler::new(model)?, assembly: Arc::clone(problem.assembly()) })
    }

    pub fn model(&self) -> NoiseModel {
        self.model
    }

    pub fn dim(&self) -> usize {
        self.assembly.dim()
    }

    pub fn edge_count(&self) -> usize {
        self.assembly.edge_count()
    }

    /// Operator for the given weights.
    pub fn operator(&self, omega: &[f64]) -> Result<SpdOperator> {
        self.assembly.assemble(omega)
    }

    /// Weights `ẑₑ ωₑ`.
    pub fn perturb(&self, omega: &[f64], rng: &mut Rng) -> Result<Vec<f64>> {
        if omega.len() != self.edge_count() {
            return Err(Error::StructureMismatch { expected: self.edge_count(), found: omega.len() });
        }
        Ok(omega.iter().map(|w| w * self.sampler.draw(rng)).collect())
    }

    /// Draws observed weights `ω̂` and the operator `Â` they induce.
    pub fn sample(&self, omega: &[f64], rng: &mut Rng) -> Result<(Vec<f64>, SpdOperator)> {
        let hat = self.perturb(omega, rng)?;
        let op = self.assembly.assemble(&hat)?;
        Ok((hat, op))
    }

    /// Draws a bootstrap operator at the observed weights.
    pub fn bootstrap_sample(&self, omega_hat: &[f64], rng: &mut Rng) -> Result<SpdOperator> {
        self.sample(omega_hat, rng).map(|(_, op)| op)
    }

    /// Enumerates every weight outcome with its exact probability.
    pub fn make_discrete(&self, omega: &[f64]) -> Result<DiscreteEnsemble> {
        let outcomes = self.model.outcomes()?;
        let edges = self.edge_count();
        if edges > MAX_DISCRETE_EDGES {
            return Err(Error::TooLarge { what: "ensemble edge count", size: edges, limit: MAX_DISCRETE_EDGES });
        }
        if omega.len() != edges {
            return Err(Error::StructureMismatch { expected: edges, found: omega.len() });
        }
        let mut combos: Vec<(f64, Vec<f64>)> = vec![(1.0, Vec::with_capacity(edges))];
        for &w in omega {
            combos = combos
                .into_iter()
                .flat_map(|(p, ws)| {
                    outcomes.iter().map(move |&(q, z)| {
                        let mut next = ws.clone();
                        next.push(z * w);
                        (p * q, next)
                    })
                })
                .collect();
        }
        let ops = combos
            .into_iter()
            .map(|(p, ws)| Ok((p, self.assembly.assemble(&ws)?)))
            .collect::<Result<Vec<_>>>()?;
        DiscreteEnsemble::new(ops)
    }
}

/// Something that can produce bootstrap operators.
pub trait BootstrapSource: Sync {
    fn dim(&self) -> usize;
    fn draw(&self, rng: &mut Rng) -> Result<SpdOperator>;
}

/// A family conditioned at observed weights.
#[derive(Clone, Copy, Debug)]
pub struct Bootstrap<'a> {
    pub family: &'a MatrixFamily,
    pub omega_hat: &'a [f64],
}

impl BootstrapSource for Bootstrap<'_> {
    fn dim(&self) -> usize {
        self.family.dim()
    }

    fn draw(&self, rng: &mut Rng) -> Result<SpdOperator> {
        self.family.bootstrap_sample(self.omega_hat, rng)
    }
}

/// Finite distribution over operators.
#[derive(Clone, Debug)]
pub struct DiscreteEnsemble {
    outcomes: Vec<(f64, SpdOperator)>,
}

impl DiscreteEnsemble {
    pub fn new(outcomes: Vec<(f64, SpdOperator)>) -> Result<Self> {
        let Some((_, first)) = outcomes.first() else {
            return Err(Error::InvalidParameter("ensemble has no outcomes".into()));
        };
        let n = first.dim();
        let mut total = 0.0;
        for (p, op) in &outcomes {
            if !(*p > 0.0) {
                return Err(Error::InvalidParameter(format!("outcome probability {p} is not positive")));
            }
            if op.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: op.dim() });
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("outcome probabilities sum to {total}")));
        }
        Ok(Self { outcomes })
    }

    /// Equal-mass ensemble.
    pub fn uniform(ops: Vec<SpdOperator>) -> Result<Self> {
        let p = 1.0 / ops.len() as f64;
        Self::new(ops.into_iter().map(|op| (p, op)).collect())
    }

    /// The ensemble concentrated on one operator.
    pub fn degenerate(op: SpdOperator) -> Self {
        Self { outcomes: vec![(1.0, op)] }
    }

    pub fn outcomes(&self) -> &[(f64, SpdOperator)] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.outcomes[0].1.dim()
    }

    /// `E[Â]`.
    pub fn mean(&self) -> DMatrix<f64> {
        let n = self.dim();
        self.outcomes.iter().fold(DMatrix::zeros(n, n), |acc, (p, op)| acc + op.to_dense() * *p)
    }

    fn pick(&self, rng: &mut Rng) -> &SpdOperator {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (p, op) in &self.outcomes {
            acc += p;
            if u < acc {
                return op;
            }
        }
        &self.outcomes[self.outcomes.len() - 1].1
    }
}

impl BootstrapSource for DiscreteEnsemble {
    fn dim(&self) -> usize {
        DiscreteEnsemble::dim(self)
    }

    fn draw(&self, rng: &mut Rng) -> Result<SpdOperator> {
        Ok(self.pick(rng).clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn path_family(model: NoiseModel, n: usize) -> (MatrixFamily, ProblemInstance) {
        let p = ProblemInstance::grid_1d(n).unwrap();
        (MatrixFamily::new(model, &p).unwrap(), p)
    }

    #[test]
    fn parse_and_display() {
        for s in ["none", "two-point:0.5,1.5", "gamma:1,0.45", "bernoulli:0.75"] {
            let m: NoiseModel = s.parse().unwrap();
            assert_eq!(m.to_string(), s);
        }
        assert_eq!("two-point:1,1".parse::<NoiseModel>().unwrap(), NoiseModel::none());
        for bad in ["", "gamma:1", "bernoulli:0", "bernoulli:1.5", "two-point:1.5,0.5", "gamma:-1,1", "uniform:0,1"] {
            assert!(matches!(bad.parse::<NoiseModel>(), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn degenerate_family_reproduces_truth() {
        let (fam, p) = path_family(NoiseModel::none(), 4);
        let mut rng = seeded(1);
        let (hat, op) = fam.sample(p.weights(), &mut rng).unwrap();
        assert_eq!(hat, p.weights());
        assert_eq!(op.to_dense(), p.truth().unwrap().to_dense());
        assert_eq!(fam.bootstrap_sample(&hat, &mut rng).unwrap().to_dense(), op.to_dense());
    }

    #[test]
    fn two_point_law_of_large_numbers() {
        let (fam, _) = path_family(NoiseModel::TwoPoint { low: 0.5, high: 1.5 }, 1);
        let mut rng = seeded(2);
        let mut sum = 0.0;
        let draws = 100_000;
        for _ in 0..draws {
            let w = fam.perturb(&[1.0, 1.0], &mut rng).unwrap();
            assert!(w.iter().all(|&x| x == 0.5 || x == 1.5));
            sum += w[0];
        }
        let mean = sum / draws as f64;
        assert!((0.99..=1.01).contains(&mean), "{mean}");
    }

    #[test]
    fn bernoulli_frequency() {
        let (fam, _) = path_family(NoiseModel::BernoulliKeep { p: 0.75 }, 1);
        let mut rng = seeded(3);
        let draws = 100_000;
        let mut zeros = 0;
        for _ in 0..draws {
            let w = fam.perturb(&[2.0, 2.0], &mut rng).unwrap();
            assert!(w.iter().all(|&x| x == 0.0 || (x - 8.0 / 3.0).abs() < 1e-15));
            zeros += usize::from(w[0] == 0.0);
        }
        let freq = zeros as f64 / draws as f64;
        assert!((freq - 0.25).abs() < 0.01, "{freq}");
    }

    #[test]
    fn gamma_mean() {
        let p = ProblemInstance::scalar(1.0).unwrap();
        let fam = MatrixFamily::new(NoiseModel::Gamma { mean: 1.0, std: 0.45 }, &p).unwrap();
        let mut rng = seeded(4);
        let draws = 100_000;
        let mean = (0..draws).map(|_| fam.perturb(&[1.3], &mut rng).unwrap()[0]).sum::<f64>() / draws as f64;
        assert!((mean / 1.3 - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn scalar_bootstrap_composes_multiplicatively() {
        let p = ProblemInstance::scalar(1.0).unwrap();
        let fam = MatrixFamily::new(NoiseModel::TwoPoint { low: 0.5, high: 1.5 }, &p).unwrap();
        let mut rng = seeded(5);
        let mut seen = [0usize; 2];
        for _ in 0..1000 {
            let v = fam.bootstrap_sample(&[1.5], &mut rng).unwrap().get(0, 0);
            match v {
                0.75 => seen[0] += 1,
                2.25 => seen[1] += 1,
                x => panic!("unexpected sample {x}"),
            }
        }
        assert!(seen.iter().all(|&c| c > 400));
    }

    #[test]
    fn structure_mismatch() {
        let (fam, _) = path_family(NoiseModel::none(), 3);
        let mut rng = seeded(0);
        assert!(matches!(fam.sample(&[1.0], &mut rng), Err(Error::StructureMismatch { expected: 4, found: 1 })));
    }

    #[test]
    fn discrete_enumeration() {
        let two_point = NoiseModel::TwoPoint { low: 0.5, high: 1.5 };
        let scalar = ProblemInstance::scalar(1.0).unwrap();
        let e = MatrixFamily::new(two_point, &scalar).unwrap().make_discrete(&[1.0]).unwrap();
        assert_eq!(e.len(), 2);
        assert!(e.outcomes().iter().all(|(p, _)| *p == 0.5));

        let edge = ProblemInstance::shifted(crate::problems::IncidenceStructure::path(2), vec![1.0], 1.0).unwrap();
        assert_eq!(MatrixFamily::new(two_point, &edge).unwrap().make_discrete(&[1.0]).unwrap().len(), 2);
        let path = ProblemInstance::grid_1d(1).unwrap();
        let e = MatrixFamily::new(two_point, &path).unwrap().make_discrete(&[1.0, 1.0]).unwrap();
        assert_eq!(e.len(), 4);
        assert!(e.outcomes().iter().all(|(p, _)| *p == 0.25));

        let tri = ProblemInstance::shifted(crate::problems::IncidenceStructure::path(4), vec![1.0; 3], 1.0).unwrap();
        let e = MatrixFamily::new(NoiseModel::BernoulliKeep { p: 0.75 }, &tri).unwrap().make_discrete(&[1.0; 3]).unwrap();
        assert_eq!(e.len(), 8);
        let mut probs: Vec<f64> = e.outcomes().iter().map(|(p, _)| *p).collect();
        probs.sort_by(f64::total_cmp);
        let mut expected: Vec<f64> = (0..8u32)
            .map(|mask| (0..3).map(|b| if mask >> b & 1 == 1 { 0.75 } else { 0.25 }).product())
            .collect();
        expected.sort_by(f64::total_cmp);
        assert_eq!(probs, expected);
    }

    #[test]
    fn discrete_rejections() {
        let gamma = NoiseModel::Gamma { mean: 1.0, std: 0.45 };
        let (fam, p) = path_family(gamma, 2);
        assert!(matches!(fam.make_discrete(p.weights()), Err(Error::UnsupportedModel(_))));
        let (fam, p) = path_family(NoiseModel::TwoPoint { low: 0.5, high: 1.5 }, 20);
        assert!(matches!(fam.make_discrete(p.weights()), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn exact_ensembles_are_unbiased() {
        for model in [NoiseModel::TwoPoint { low: 0.5, high: 1.5 }, NoiseModel::BernoulliKeep { p: 0.75 }, NoiseModel::none()] {
            let (fam, p) = path_family(model, 4);
            let e = fam.make_discrete(p.weights()).unwrap();
            let truth = p.truth().unwrap().to_dense();
            assert!((e.mean() - &truth).norm() <= 1e-12 * truth.norm());
        }
    }

    #[test]
    fn gamma_is_unbiased_empirically() {
        let (fam, p) = path_family(NoiseModel::Gamma { mean: 1.0, std: 0.45 }, 3);
        let mut rng = seeded(11);
        let truth = p.truth().unwrap().to_dense();
        let draws = 1_000_000;
        let mut acc = DMatrix::zeros(3, 3);
        for _ in 0..draws {
            acc += fam.sample(p.weights(), &mut rng).unwrap().1.to_dense();
        }
        acc /= draws as f64;
        assert!((acc - &truth).norm() <= 1e-3 * truth.norm());
    }

    #[test]
    fn ensemble_validation_and_draws() {
        assert!(DiscreteEnsemble::new(Vec::new()).is_err());
        assert!(DiscreteEnsemble::new(vec![(0.4, SpdOperator::scalar(1.0)), (0.4, SpdOperator::scalar(2.0))]).is_err());
        assert!(DiscreteEnsemble::new(vec![(0.5, SpdOperator::scalar(1.0)), (0.5, SpdOperator::identity(2))]).is_err());
        let e = DiscreteEnsemble::uniform(vec![SpdOperator::scalar(0.5), SpdOperator::scalar(1.5)]).unwrap();
        let mut rng = seeded(6);
        let highs = (0..10_000).filter(|_| e.draw(&mut rng).unwrap().get(0, 0) == 1.5).count();
        assert!((4700..5300).contains(&highs));
    }
}
