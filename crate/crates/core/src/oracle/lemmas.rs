use nalgebra::DMatrix;

use super::dense::{inv_sqrt_spd, inverse_spd, min_eig, symmetrize, trace_product};
use crate::noise::DiscreteEnsemble;
use crate::{Error, Result};

/// Slack for floating-point semidefiniteness assertions.
pub const EIG_SLACK: f64 = 1e-10;

/// Outcome of one lemma check.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaReport {
    /// Whether the lemma's hypotheses held for this instance.
    pub precondition: bool,
    /// Whether the conclusion held (meaningful only if `precondition`).
    pub holds: bool,
    /// Signed slack of the conclusion; negative means violated.
    pub margin: f64,
}

impl LemmaReport {
    fn precondition_failed() -> Self {
        Self { precondition: false, holds: false, margin: f64::NAN }
    }

    /// Hypotheses held and the conclusion did too.
    pub fn passed(&self) -> bool {
        self.precondition && self.holds
    }
}

/// Inversion reverses the expected Löwner order: `E[Â] ⪯ A` implies
/// `E[Â⁻¹] ⪰ A⁻¹`.
pub fn check_loewner(ensemble: &DiscreteEnsemble, a: &DMatrix<f64>) -> Result<LemmaReport> {
    let scale = a.amax().max(f64::MIN_POSITIVE);
    if min_eig(&(a - ensemble.mean())) < -EIG_SLACK * scale {
        return Ok(LemmaReport::precondition_failed());
    }
    let a_inv = inverse_spd(a)?;
    let mut inv_mean = DMatrix::zeros(a.nrows(), a.ncols());
    for (p, op) in ensemble.outcomes() {
        inv_mean += inverse_spd(&op.to_dense())? * *p;
    }
    let margin = min_eig(&(inv_mean - a_inv));
    Ok(LemmaReport { precondition: true, holds: margin >= -EIG_SLACK, margin })
}

fn matrix_power(x: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    (0..k).fold(DMatrix::identity(x.nrows(), x.ncols()), |acc, _| acc * x)
}

/// For random `X̂ ⪰ 0`, `j ≤ k`, `r ≤ j`:
/// `E tr(SᵀX̂ʲS) E tr(SᵀX̂ᵏS) ≤ E tr(SᵀX̂^{j−r}S) E tr(SᵀX̂^{k+r}S)`.
pub fn check_trace_inequality(
    samples: &[(f64, DMatrix<f64>)],
    s: &DMatrix<f64>,
    j: usize,
    k: usize,
    r: usize,
) -> Result<LemmaReport> {
    if j > k || r > j || samples.is_empty() {
        return Ok(LemmaReport::precondition_failed());
    }
    for (_, x) in samples {
        if x.nrows() != s.nrows() {
            return Err(Error::DimensionMismatch { expected: s.nrows(), found: x.nrows() });
        }
        if min_eig(x) < -EIG_SLACK * x.amax().max(1.0) {
            return Ok(LemmaReport::precondition_failed());
        }
    }
    let sst = s * s.transpose();
    let moment = |p: usize| -> f64 {
        samples.iter().map(|(prob, x)| prob * trace_product(&sst, &matrix_power(x, p))).sum()
    };
    let lhs = moment(j) * moment(k);
    let rhs = moment(j - r) * moment(k + r);
    let margin = rhs - lhs;
    Ok(LemmaReport { precondition: true, holds: margin >= -1e-12 * lhs.abs().max(rhs.abs()), margin })
}

/// For nonnegative sequences with `a_N b_k ≥ b_N a_k` whenever `k < N`, the
/// partial-sum ratios `Σ_{k≤N} a_k / Σ_{k≤N} b_k` are nondecreasing.
pub fn check_monotone_ratio(a: &[f64], b: &[f64]) -> LemmaReport {
    let tol = |x: f64, y: f64| 1e-12 * x.abs().max(y.abs());
    let nonneg = a.iter().chain(b).all(|&x| x >= 0.0 && x.is_finite());
    if a.len() != b.len() || a.is_empty() || !nonneg || !(b[0] > 0.0) {
        return LemmaReport::precondition_failed();
    }
    for n in 0..a.len() {
        for k in 0..n {
            if a[n] * b[k] < b[n] * a[k] - tol(a[n] * b[k], b[n] * a[k]) {
                return LemmaReport::precondition_failed();
            }
        }
    }
    let (mut sa, mut sb) = (0.0, 0.0);
    let mut ratios = Vec::with_capacity(a.len());
    for (x, y) in a.iter().zip(b) {
        sa += x;
        sb += y;
        ratios.push(sa / sb);
    }
    let margin = ratios.windows(2).map(|w| w[1] - w[0] + tol(w[0], w[1])).fold(f64::INFINITY, f64::min);
    LemmaReport { precondition: true, holds: margin >= 0.0, margin }
}

/// Convergence of the Taylor series of `X⁻¹` about `Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct NeumannReport {
    pub report: LemmaReport,
    /// `‖I − Y^{-1/2} X Y^{-1/2}‖₂`.
    pub radius: f64,
    /// Fitted geometric decay rate of the residual.
    pub rate: f64,
    /// `‖partial_K − X⁻¹‖₂` for `K = 0..=k_max`.
    pub residuals: Vec<f64>,
}

/// Partial sums `Σ_{k≤K} Y^{-1/2} Mᵏ Y^{-1/2}` with `M = I − Y^{-1/2}XY^{-1/2}`
/// converge to `X⁻¹` geometrically when `‖M‖₂ < 1`. The rate is fitted by
/// least squares on `log residual` over `K = 5..=k_max`, ignoring residuals at
/// rounding level.
pub fn check_neumann_tail(x: &DMatrix<f64>, y: &DMatrix<f64>, k_max: usize) -> Result<NeumannReport> {
    let n = x.nrows();
    if y.nrows() != n || x.ncols() != n || y.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: y.nrows() });
    }
    let y_inv_sqrt = inv_sqrt_spd(y);
    let m = symmetrize(DMatrix::identity(n, n) - &y_inv_sqrt * x * &y_inv_sqrt);
    let radius = m.symmetric_eigenvalues().iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if radius >= 1.0 {
        return Err(Error::PreconditionViolated(format!("series radius {radius} is not below 1")));
    }
    let x_inv = inverse_spd(x)?;
    let spectral = |d: &DMatrix<f64>| d.symmetric_eigenvalues().iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut partial = DMatrix::zeros(n, n);
    let mut power = DMatrix::identity(n, n);
    let mut residuals = Vec::with_capacity(k_max + 1);
    for _ in 0..=k_max {
        partial += &y_inv_sqrt * &power * &y_inv_sqrt;
        residuals.push(spectral(&symmetrize(&partial - &x_inv)));
        power = &power * &m;
    }
    let floor = 1e-12 * spectral(&x_inv);
    let above: Vec<(f64, f64)> = residuals
        .iter()
        .enumerate()
        .skip(5)
        .filter(|(_, r)| **r > floor)
        .map(|(k, r)| (k as f64, r.ln()))
        .collect();
    let points = &above[above.len() / 2..];
    let rate = if points.len() < 2 {
        0.0
    } else {
        let len = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / len;
        let my = points.iter().map(|p| p.1).sum::<f64>() / len;
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (sxy / sxx).exp()
    };
    let last = *residuals.last().expect("at least one partial sum");
    let holds = rate < 1.0 && (last <= residuals[0] || last <= floor);
    Ok(NeumannReport {
        report: LemmaReport { precondition: true, holds, margin: 1.0 - rate },
        radius,
        rate,
        residuals,
    })
}
