use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::StandardNormal;

use super::dense::{sqrt_psd, symmetrize};
use crate::linalg::SpdOperator;
use crate::noise::{DiscreteEnsemble, MatrixFamily, NoiseModel};
use crate::problems::{IncidenceStructure, ProblemInstance};
use crate::rng::Rng;
use crate::Result;

/// A reference operator with a finite ensemble of observations of it.
#[derive(Clone, Debug)]
pub struct RandomEnsemble {
    pub a: DMatrix<f64>,
    pub ensemble: DiscreteEnsemble,
}

fn gaussian(n: usize, m: usize, rng: &mut Rng) -> DMatrix<f64> {
    DMatrix::from_fn(n, m, |_, _| rng.sample(StandardNormal))
}

/// Random orthogonal matrix.
pub fn random_orthogonal(n: usize, rng: &mut Rng) -> DMatrix<f64> {
    gaussian(n, n, rng).qr().q()
}

/// Symmetric matrix with the given eigenvalues and random eigenvectors.
pub fn with_spectrum(eigenvalues: &[f64], rng: &mut Rng) -> DMatrix<f64> {
    let q = random_orthogonal(eigenvalues.len(), rng);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(eigenvalues));
    symmetrize(&q * d * q.transpose())
}

/// SPD matrix with eigenvalues log-uniform in `[1, cond]`.
pub fn random_spd(n: usize, cond: f64, rng: &mut Rng) -> DMatrix<f64> {
    let eig: Vec<f64> = (0..n).map(|_| cond.powf(rng.random::<f64>())).collect();
    with_spectrum(&eig, rng)
}

fn observe(a_half: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<SpdOperator> {
    SpdOperator::from_dense(symmetrize(a_half * y * a_half))
}

/// Ensemble `Â = A^{1/2} (I − Xᵢ) A^{1/2}` built from `pairs` mirrored pairs
/// `±Xᵢ` with `‖Xᵢ‖₂ < 1`, then scaled by `c ∈ (0.8, 1]`. Hence
/// `E[Â] = cA ⪯ A` and `0 ≺ Â ≺ 2A`.
pub fn random_unshifted(n: usize, pairs: usize, rng: &mut Rng) -> Result<RandomEnsemble> {
    let a = random_spd(n, 100.0, rng);
    let a_half = sqrt_psd(&a);
    let scale = if rng.random::<bool>() { 1.0 } else { 0.8 + 0.2 * rng.random::<f64>() };
    let mut ops = Vec::with_capacity(2 * pairs);
    for _ in 0..pairs {
        let radius = 0.05 + 0.9 * rng.random::<f64>();
        let eig: Vec<f64> = (0..n).map(|_| radius * (2.0 * rng.random::<f64>() - 1.0)).collect();
        let x = with_spectrum(&eig, rng);
        let id = DMatrix::identity(n, n);
        ops.push(observe(&a_half, &((&id - &x) * scale))?);
        ops.push(observe(&a_half, &((&id + &x) * scale))?);
    }
    Ok(RandomEnsemble { a, ensemble: DiscreteEnsemble::uniform(ops)? })
}

/// Ensemble whose outcomes may exceed `2A`: each group is a pair
/// `I + D` (probability 1/5) and `I − D/4` (probability 4/5) with the
/// eigenvalues of `D` in `(−0.9, 3.5)`, so `E[Â] = A`.
pub fn random_wide(n: usize, groups: usize, rng: &mut Rng) -> Result<RandomEnsemble> {
    let a = random_spd(n, 100.0, rng);
    let a_half = sqrt_psd(&a);
    let weight = 1.0 / groups as f64;
    let mut outcomes = Vec::with_capacity(2 * groups);
    for _ in 0..groups {
        let eig: Vec<f64> = (0..n).map(|_| -0.9 + 4.4 * rng.random::<f64>()).collect();
        let d = with_spectrum(&eig, rng);
        let id = DMatrix::identity(n, n);
        outcomes.push((0.2 * weight, observe(&a_half, &(&id + &d))?));
        outcomes.push((0.8 * weight, observe(&a_half, &(&id - &d * 0.25))?));
    }
    Ok(RandomEnsemble { a, ensemble: DiscreteEnsemble::new(outcomes)? })
}

/// Two-point noise `{low, 2 − low}` on a random connected graph with `n`
/// interior vertices, one or two boundary vertices and at most 10 edges.
pub fn random_graph_ensemble(n: usize, rng: &mut Rng) -> Result<RandomEnsemble> {
    let boundary = 1 + usize::from(rng.random::<bool>());
    let vertices = n + boundary;
    let mut edges: Vec<(usize, usize)> = (1..vertices).map(|v| (rng.random_range(0..v), v)).collect();
    while edges.len() < 10.min(vertices * (vertices - 1) / 2) && rng.random::<f64>() < 0.7 {
        let (u, v) = (rng.random_range(0..vertices), rng.random_range(0..vertices));
        if u != v && !edges.iter().any(|&(x, y)| (x, y) == (u, v) || (x, y) == (v, u)) {
            edges.push((u, v));
        }
    }
    let weights: Vec<f64> = edges.iter().map(|_| 0.5 + rng.random::<f64>()).collect();
    let structure = IncidenceStructure::new(vertices, edges)?.with_boundary((n..vertices).collect())?;
    let problem = ProblemInstance::dirichlet(structure, weights)?;
    let low = 0.1 + 0.8 * rng.random::<f64>();
    let family = MatrixFamily::new(NoiseModel::TwoPoint { low, high: 2.0 - low }, &problem)?;
    Ok(RandomEnsemble { a: problem.truth()?.to_dense(), ensemble: family.make_discrete(problem.weights())? })
}

/// Random PSD matrix with eigenvalues in `[0, 1)`.
pub fn random_psd(n: usize, rng: &mut Rng) -> DMatrix<f64> {
    let eig: Vec<f64> = (0..n).map(|_| if rng.random::<f64>() < 0.2 { 0.0 } else { rng.random() }).collect();
    with_spectrum(&eig, rng)
}
