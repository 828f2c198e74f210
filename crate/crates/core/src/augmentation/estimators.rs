use std::sync::OnceLock;

use rand::Rng as _;

use super::series::series_terms;
use super::spec::{Method, Weights};
use super::window::{Window, WindowKind};
use crate::linalg::{dot, factorize, generalized_spectral_norm, Factorization, PowerOptions, SpdOperator, SpectralNormEstimate};
use crate::noise::BootstrapSource;
use crate::rng::{substream, Purpose, Rng};
use crate::{Error, Result};

/// Estimated augmentation factor with diagnostics.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AugmentationEstimate {
    /// Factor after clamping.
    pub beta: f64,
    /// Factor before clamping.
    pub raw_beta: f64,
    /// Sample mean of the numerator terms.
    pub numerator: f64,
    /// Sample mean of the denominator terms.
    pub denominator: f64,
    /// Delta-method standard error of `raw_beta`.
    pub std_error: f64,
    /// Sample means of the series terms `t_k` (truncated methods).
    pub mean_terms: Vec<f64>,
    /// Shifts `α` used per bootstrap sample (AST-EAG).
    pub alphas: Vec<f64>,
    /// Number of power iterations that hit the iteration cap.
    pub unconverged: usize,
}

/// The observed operator with its factorization and a set of bootstrap
/// samples drawn at the observed parameters.
///
/// Sample factorizations and shifts are computed on first use, so methods
/// sharing a context share that work.
#[derive(Debug)]
pub struct BootstrapContext<'a> {
    observed: &'a SpdOperator,
    factor: &'a Factorization,
    samples: Vec<SpdOperator>,
    factors: Vec<OnceLock<Factorization>>,
    alphas: Vec<OnceLock<SpectralNormEstimate>>,
    power_seed: u64,
    power: PowerOptions,
}

impl<'a> BootstrapContext<'a> {
    /// Draws `m` bootstrap samples from `source`.
    pub fn draw<S: BootstrapSource + ?Sized>(
        observed: &'a SpdOperator,
        factor: &'a Factorization,
        source: &S,
        m: usize,
        rng: &mut Rng,
    ) -> Result<Self> {
        let n = observed.dim();
        if factor.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: factor.dim() });
        }
        if source.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: source.dim() });
        }
        if m == 0 {
            return Err(Error::InvalidParameter("bootstrap sample count must be at least 1".into()));
        }
        let samples = (0..m).map(|_| source.draw(rng)).collect::<Result<Vec<_>>>()?;
        let power_seed = rng.random();
        Ok(Self {
            observed,
            factor,
            factors: (0..m).map(|_| OnceLock::new()).collect(),
            alphas: (0..m).map(|_| OnceLock::new()).collect(),
            samples,
            power_seed,
            power: PowerOptions::default(),
        })
    }

    pub fn with_power_options(mut self, power: PowerOptions) -> Self {
        self.power = power;
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.observed.dim()
    }

    pub fn observed(&self) -> &SpdOperator {
        self.observed
    }

    pub fn factor(&self) -> &Factorization {
        self.factor
    }

    pub fn sample(&self, i: usize) -> &SpdOperator {
        &self.samples[i]
    }

    /// Factorization of bootstrap sample `i`.
    pub fn sample_factor(&self, i: usize) -> Result<&Factorization> {
        if let Some(f) = self.factors[i].get() {
            return Ok(f);
        }
        let f = factorize(&self.samples[i]).map_err(|e| Error::BootstrapSample { index: i, source: Box::new(e) })?;
        Ok(self.factors[i].get_or_init(|| f))
    }

    /// `‖Â^{-1/2} Âᵦ Â^{-1/2}‖₂` for sample `i`, by power iteration.
    pub fn spectral_norm(&self, i: usize) -> Result<SpectralNormEstimate> {
        if let Some(a) = self.alphas[i].get() {
            return Ok(*a);
        }
        let mut rng = substream(self.power_seed, i as u64, Purpose::PowerMethod);
        let est = generalized_spectral_norm(&self.samples[i], self.factor, self.power, &mut rng)
            .map_err(|e| Error::BootstrapSample { index: i, source: Box::new(e) })?;
        Ok(*self.alphas[i].get_or_init(|| est))
    }

    fn check_probes(&self, probes: &[Vec<f64>]) -> Result<()> {
        if probes.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: probes.len() });
        }
        if let Some(p) = probes.iter().find(|p| p.len() != self.dim()) {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: p.len() });
        }
        Ok(())
    }
}

/// Probe vectors for one estimation: energy probes `q ~ N(0, L)`, and the two
/// AG streams `q ~ N(0, W)`, `p ~ N(0, BW)`.
#[derive(Clone, Debug, Default)]
pub struct Probes {
    pub energy: Vec<Vec<f64>>,
    pub ag_q: Vec<Vec<f64>>,
    pub ag_p: Vec<Vec<f64>>,
}

impl Probes {
    /// Draws `m` probes of each kind, in the order energy, AG `q`, AG `p`.
    pub fn draw(weights: &Weights, m: usize, rng: &mut Rng) -> Self {
        let energy = (0..m).map(|_| weights.l().sample(rng)).collect();
        let ag_q = (0..m).map(|_| weights.w().sample(rng)).collect();
        let ag_p = (0..m).map(|_| weights.bw().sample(rng)).collect();
        Self { energy, ag_q, ag_p }
    }
}

/// `Σa / Σb` with a delta-method standard error, optionally clamped at zero.
fn ratio(num: &[f64], den: &[f64], clamp: bool) -> Result<AugmentationEstimate> {
    let m = num.len() as f64;
    let (sa, sb): (f64, f64) = (num.iter().sum(), den.iter().sum());
    if !(sb > 0.0 && sb.is_finite() && sa.is_finite()) {
        return Err(Error::DegenerateDenominator);
    }
    let raw = sa / sb;
    let mean_b = sb / m;
    let std_error = if num.len() > 1 {
        let ss: f64 = num.iter().zip(den).map(|(a, b)| (a - raw * b).powi(2)).sum();
        (ss / (m - 1.0) / m).sqrt() / mean_b
    } else {
        0.0
    };
    Ok(AugmentationEstimate {
        beta: if clamp { raw.max(0.0) } else { raw },
        raw_beta: raw,
        numerator: sa / m,
        denominator: mean_b,
        std_error,
        ..Default::default()
    })
}

/// Factor for `K̂ = b bᵀ Â⁻¹`: `(1/‖b‖²) Var(bᵀÂᵦ⁻¹b) / E[(bᵀÂᵦ⁻¹b)²]`.
pub fn estimate_basic(ctx: &BootstrapContext<'_>, b: &[f64]) -> Result<AugmentationEstimate> {
    if b.len() != ctx.dim() {
        return Err(Error::DimensionMismatch { expected: ctx.dim(), found: b.len() });
    }
    if ctx.len() < 2 {
        return Err(Error::InvalidParameter("basic augmentation needs at least 2 bootstrap samples".into()));
    }
    let bb = dot(b, b);
    if bb == 0.0 {
        return Err(Error::InvalidParameter("right-hand side is zero".into()));
    }
    let xs = (0..ctx.len())
        .map(|i| Ok(dot(b, &ctx.sample_factor(i)?.solve(b)?)))
        .collect::<Result<Vec<f64>>>()?;
    let m = xs.len() as f64;
    let m1 = xs.iter().sum::<f64>() / m;
    let m2 = xs.iter().map(|x| x * x).sum::<f64>() / m;
    if !(m2 > 0.0 && m2.is_finite()) {
        return Err(Error::DegenerateDenominator);
    }
    let raw = ((m2 - m1 * m1) / m2).max(0.0) / bb;
    let (g1, g2) = (-2.0 * m1 / m2, m1 * m1 / (m2 * m2));
    let var = xs
        .iter()
        .map(|x| {
            let d = g1 * (x - m1) + g2 * (x * x - m2);
            d * d
        })
        .sum::<f64>()
        / (m - 1.0);
    Ok(AugmentationEstimate {
        beta: raw,
        raw_beta: raw,
        numerator: (m2 - m1 * m1) / bb,
        denominator: m2,
        std_error: (var / m).sqrt() / bb,
        ..Default::default()
    })
}

/// Factor for `K̂ = R Â⁻¹ B`. Not clamped.
pub fn estimate_ag(
    ctx: &BootstrapContext<'_>,
    weights: &Weights,
    q: &[Vec<f64>],
    p: &[Vec<f64>],
) -> Result<AugmentationEstimate> {
    ctx.check_probes(q)?;
    ctx.check_probes(p)?;
    let mut num = Vec::with_capacity(ctx.len());
    let mut den = Vec::with_capacity(ctx.len());
    for i in 0..ctx.len() {
        let f = ctx.sample_factor(i)?;
        let yq = f.solve(&q[i])?;
        let xq = ctx.factor.solve(&q[i])?;
        let yp = f.solve(&p[i])?;
        num.push(weights.w_inner(&yq, &yq) - weights.w_inner(&yq, &xq));
        den.push(weights.rw_inner(&yp, &yp));
    }
    ratio(&num, &den, false)
}

/// Untruncated energy-norm factor, clamped at zero.
pub fn estimate_eag(ctx: &BootstrapContext<'_>, q: &[Vec<f64>]) -> Result<AugmentationEstimate> {
    ctx.check_probes(q)?;
    let mut num = Vec::with_capacity(ctx.len());
    let mut den = Vec::with_capacity(ctx.len());
    for (i, qi) in q.iter().enumerate() {
        let y = ctx.sample_factor(i)?.solve(qi)?;
        let energy = ctx.observed.quad_form(&y)?;
        num.push(energy - dot(qi, &y));
        den.push(energy);
    }
    ratio(&num, &den, true)
}

fn accumulate_terms(mean: &mut Vec<f64>, terms: &[f64], scale: f64) {
    if mean.len() < terms.len() {
        mean.resize(terms.len(), 0.0);
    }
    mean.iter_mut().zip(terms).for_each(|(m, t)| *m += t * scale);
}

/// Windowed energy-norm factor expanded about the observed operator. Only
/// solves against the observed factorization are needed.
pub fn estimate_teag(
    ctx: &BootstrapContext<'_>,
    q: &[Vec<f64>],
    order: usize,
    kind: WindowKind,
) -> Result<AugmentationEstimate> {
    if matches!(kind, WindowKind::Shifted { .. }) {
        return Err(Error::InvalidParameter("T-EAG takes a soft or hard window".into()));
    }
    ctx.check_probes(q)?;
    let window = Window::new(kind, order)?;
    let m = ctx.len() as f64;
    let mut num = Vec::with_capacity(ctx.len());
    let mut den = Vec::with_capacity(ctx.len());
    let mut mean_terms = Vec::new();
    for (i, qi) in q.iter().enumerate() {
        let terms = series_terms(ctx.factor, &ctx.samples[i], qi, window.support(), 1.0)?;
        let (a, b) = window.weigh(&terms);
        num.push(a);
        den.push(b);
        accumulate_terms(&mut mean_terms, &terms, 1.0 / m);
    }
    let mut est = ratio(&num, &den, true)?;
    est.mean_terms = mean_terms;
    Ok(est)
}

/// Energy-norm factor with a per-sample shift `α = max(1, ‖Â^{-1/2}ÂᵦÂ^{-1/2}‖₂)`.
pub fn estimate_asteag(ctx: &BootstrapContext<'_>, q: &[Vec<f64>], order: usize) -> Result<AugmentationEstimate> {
    ctx.check_probes(q)?;
    if order < 1 {
        return Err(Error::InvalidOrder(order));
    }
    let m = ctx.len() as f64;
    let mut num = Vec::with_capacity(ctx.len());
    let mut den = Vec::with_capacity(ctx.len());
    let mut alphas = Vec::with_capacity(ctx.len());
    let mut unconverged = 0;
    let mut mean_terms = Vec::new();
    for (i, qi) in q.iter().enumerate() {
        let est = ctx.spectral_norm(i)?;
        unconverged += usize::from(!est.converged);
        let alpha = est.value.max(1.0);
        let window = Window::new(WindowKind::shifted(alpha)?, order)?;
        let terms = series_terms(ctx.factor, &ctx.samples[i], qi, order, alpha)?;
        let (a, b) = window.weigh(&terms);
        let scale = alpha.powi(-2);
        num.push(scale * a);
        den.push(scale * b);
        alphas.push(alpha);
        accumulate_terms(&mut mean_terms, &terms, 1.0 / m);
    }
    let mut est = ratio(&num, &den, true)?;
    est.mean_terms = mean_terms;
    est.alphas = alphas;
    est.unconverged = unconverged;
    Ok(est)
}

/// Dispatches on `method` with prepared samples and probes.
pub fn estimate_with(
    method: Method,
    ctx: &BootstrapContext<'_>,
    weights: &Weights,
    probes: &Probes,
    b: &[f64],
) -> Result<AugmentationEstimate> {
    match method {
        Method::Naive => Ok(AugmentationEstimate::default()),
        Method::Basic => estimate_basic(ctx, b),
        Method::Ag => estimate_ag(ctx, weights, &probes.ag_q, &probes.ag_p),
        Method::Eag => estimate_eag(ctx, &probes.energy),
        Method::TeagSoft(n) => estimate_teag(ctx, &probes.energy, n, WindowKind::Soft),
        Method::TeagHard(n) => estimate_teag(ctx, &probes.energy, n, WindowKind::Hard),
        Method::AstEag(n) => estimate_asteag(ctx, &probes.energy, n),
    }
}
