use nalgebra::{DMatrix, DVector};

use super::dense::{inv_sqrt_spd, inverse_spd, max_eig, sqrt_psd, symmetrize, trace_product};
use crate::augmentation::{Window, WindowKind};
use crate::noise::DiscreteEnsemble;
use crate::{Error, Result};

/// Largest dimension handled by the dense oracle.
pub const MAX_ORACLE_DIM: usize = 8;
/// Largest truncation order handled by the dense oracle.
pub const MAX_ORACLE_ORDER: usize = 64;

fn check_dim(ensemble: &DiscreteEnsemble, a: &DMatrix<f64>) -> Result<usize> {
    let n = ensemble.dim();
    if n > MAX_ORACLE_DIM {
        return Err(Error::TooLarge { what: "oracle dimension", size: n, limit: MAX_ORACLE_DIM });
    }
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.nrows() });
    }
    Ok(n)
}

fn check_square(m: &DMatrix<f64>, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: m.nrows().max(m.ncols()) });
    }
    Ok(())
}

/// Exact moments of an ensemble relative to a reference operator `A`.
#[derive(Clone, Debug)]
pub struct ExactMoments {
    /// `E[Â⁻¹]`.
    pub inv_mean: DMatrix<f64>,
    /// `E[Â⁻¹ A Â⁻¹]`.
    pub energy_mean: DMatrix<f64>,
    /// `E[Xᵏ]` for `k = 0..=k_max`, with `X = I − α⁻¹ A^{-1/2} Â A^{-1/2}`.
    pub x_powers: Vec<DMatrix<f64>>,
    /// `A^{-1/2}`.
    pub a_inv_sqrt: DMatrix<f64>,
}

impl ExactMoments {
    pub fn new(ensemble: &DiscreteEnsemble, a: &DMatrix<f64>, alpha: f64, k_max: usize) -> Result<Self> {
        let n = check_dim(ensemble, a)?;
        if k_max > 2 * MAX_ORACLE_ORDER {
            return Err(Error::TooLarge { what: "oracle series length", size: k_max, limit: 2 * MAX_ORACLE_ORDER });
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidShift(alpha));
        }
        let a_inv_sqrt = inv_sqrt_spd(a);
        let mut inv_mean = DMatrix::zeros(n, n);
        let mut energy_mean = DMatrix::zeros(n, n);
        let mut x_powers = vec![DMatrix::zeros(n, n); k_max + 1];
        for (p, op) in ensemble.outcomes() {
            let hat = op.to_dense();
            let inv = inverse_spd(&hat)?;
            energy_mean += symmetrize(&inv * a * &inv) * *p;
            inv_mean += &inv * *p;
            let x = symmetrize(DMatrix::identity(n, n) - &a_inv_sqrt * &hat * &a_inv_sqrt / alpha);
            let mut power = DMatrix::identity(n, n);
            for slot in x_powers.iter_mut() {
                *slot += &power * *p;
                power = &power * &x;
            }
        }
        Ok(Self { inv_mean, energy_mean, x_powers, a_inv_sqrt })
    }

    /// Expected series terms `E[qᵀ A^{-1/2} Xᵏ A^{-1/2} q]` for `q ~ N(0, L)`.
    pub fn series(&self, l: &DMatrix<f64>) -> Vec<f64> {
        let s = &self.a_inv_sqrt * l * &self.a_inv_sqrt;
        self.x_powers.iter().map(|x| trace_product(&s, x)).collect()
    }
}

/// Optimal energy-norm factor
/// `tr(L E[Â⁻¹AÂ⁻¹ − Â⁻¹]) / tr(L E[Â⁻¹AÂ⁻¹])`.
pub fn exact_beta_energy(ensemble: &DiscreteEnsemble, a: &DMatrix<f64>, l: &DMatrix<f64>) -> Result<f64> {
    let m = ExactMoments::new(ensemble, a, 1.0, 0)?;
    check_square(l, a.nrows())?;
    let den = trace_product(l, &m.energy_mean);
    if !(den > 0.0) {
        return Err(Error::DegenerateDenominator);
    }
    Ok((den - trace_product(l, &m.inv_mean)) / den)
}

/// Optimal factor for `K̂ = RÂ⁻¹B` and its covariance lower bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AgFactors {
    pub optimal: f64,
    pub lower_bound: f64,
}

pub fn exact_beta_ag(
    ensemble: &DiscreteEnsemble,
    a: &DMatrix<f64>,
    r: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<AgFactors> {
    let n = check_dim(ensemble, a)?;
    check_square(r, n)?;
    check_square(b, n)?;
    let w = symmetrize(r * b);
    let rw = symmetrize(r * &w);
    let bw = symmetrize(b * &w);
    let a_inv = inverse_spd(a)?;
    let w_half = sqrt_psd(&w);
    let left = sqrt_psd(r) * &w_half;
    let right = &w_half * sqrt_psd(b);

    let mut inv_mean = DMatrix::zeros(n, n);
    let mut num_first = 0.0;
    let mut den = 0.0;
    let mut second_moment = 0.0;
    let mut frob = 0.0;
    for (p, op) in ensemble.outcomes() {
        let inv = inverse_spd(&op.to_dense())?;
        let w_inv = &w * &inv;
        num_first += p * trace_product(&w_inv, &w_inv);
        den += p * trace_product(&(&bw * &inv), &(&rw * &inv));
        let whitened = &w_half * &inv * &w_half;
        second_moment += p * trace_product(&whitened, &whitened);
        frob += p * (&left * &inv * &right).norm_squared();
        inv_mean += inv * *p;
    }
    let num = num_first - trace_product(&(&w * &inv_mean), &(&w * &a_inv));
    let mean_whitened = &w_half * &inv_mean * &w_half;
    let cov = second_moment - trace_product(&mean_whitened, &mean_whitened);
    if !(den > 0.0 && frob > 0.0) {
        return Err(Error::DegenerateDenominator);
    }
    Ok(AgFactors { optimal: num / den, lower_bound: cov / frob })
}

/// Optimal factor for `K̂ = b bᵀ Â⁻¹`: `(1/‖b‖²) Var(bᵀÂ⁻¹b) / E[(bᵀÂ⁻¹b)²]`.
pub fn exact_beta_basic(ensemble: &DiscreteEnsemble, b: &[f64]) -> Result<f64> {
    let n = ensemble.dim();
    if n > MAX_ORACLE_DIM {
        return Err(Error::TooLarge { what: "oracle dimension", size: n, limit: MAX_ORACLE_DIM });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    let bv = DVector::from_column_slice(b);
    let (mut m1, mut m2) = (0.0, 0.0);
    for (p, op) in ensemble.outcomes() {
        let x = bv.dot(&(inverse_spd(&op.to_dense())? * &bv));
        m1 += p * x;
        m2 += p * x * x;
    }
    if !(m2 > 0.0) {
        return Err(Error::DegenerateDenominator);
    }
    Ok((m2 - m1 * m1) / m2 / bv.norm_squared())
}

/// Smallest `α ≥ 1` with every outcome `Â ⪯ αA`.
pub fn shift_for(ensemble: &DiscreteEnsemble, a: &DMatrix<f64>) -> Result<f64> {
    check_dim(ensemble, a)?;
    let a_inv_sqrt = inv_sqrt_spd(a);
    Ok(ensemble
        .outcomes()
        .iter()
        .map(|(_, op)| max_eig(&(&a_inv_sqrt * op.to_dense() * &a_inv_sqrt)))
        .fold(1.0, f64::max))
}

/// Windowed factor `Σ w(k) E[t_k] / Σ w̄(k) E[t_k]` at order `order`. Shifted
/// windows expand about `αA` with the window's own `α`.
pub fn exact_truncated_factor(
    ensemble: &DiscreteEnsemble,
    a: &DMatrix<f64>,
    l: &DMatrix<f64>,
    order: usize,
    kind: WindowKind,
) -> Result<f64> {
    if order > MAX_ORACLE_ORDER {
        return Err(Error::TooLarge { what: "oracle order", size: order, limit: MAX_ORACLE_ORDER });
    }
    check_square(l, a.nrows())?;
    let window = Window::new(kind, order)?;
    let alpha = match kind {
        WindowKind::Shifted { alpha } => alpha,
        _ => 1.0,
    };
    let terms = ExactMoments::new(ensemble, a, alpha, window.support())?.series(l);
    let (num, den) = window.weigh(&terms);
    if !(den > 0.0) {
        return Err(Error::DegenerateDenominator);
    }
    Ok(num / den)
}

/// All truncated factors for orders `1..=max_order` from one set of moments.
pub fn exact_truncated_chain(
    ensemble: &DiscreteEnsemble,
    a: &DMatrix<f64>,
    l: &DMatrix<f64>,
    max_order: usize,
    kind: WindowKind,
) -> Result<Vec<f64>> {
    if max_order > MAX_ORACLE_ORDER {
        return Err(Error::TooLarge { what: "oracle order", size: max_order, limit: MAX_ORACLE_ORDER });
    }
    check_square(l, a.nrows())?;
    let alpha = match kind {
        WindowKind::Shifted { alpha } => alpha,
        _ => 1.0,
    };
    let terms = ExactMoments::new(ensemble, a, alpha, kind.support(max_order))?.series(l);
    (1..=max_order)
        .map(|order| {
            let (num, den) = Window::new(kind, order)?.weigh(&terms);
            if den > 0.0 {
                Ok(num / den)
            } else {
                Err(Error::DegenerateDenominator)
            }
        })
        .collect()
}

/// Factor with a per-outcome shift `α(Â) = max(1, ‖A^{-1/2}ÂA^{-1/2}‖₂)` and
/// `α⁻²` weights.
pub fn exact_accelerated_factor(
    ensemble: &DiscreteEnsemble,
    a: &DMatrix<f64>,
    l: &DMatrix<f64>,
    order: usize,
) -> Result<f64> {
    let n = check_dim(ensemble, a)?;
    check_square(l, n)?;
    if order > MAX_ORACLE_ORDER {
        return Err(Error::TooLarge { what: "oracle order", size: order, limit: MAX_ORACLE_ORDER });
    }
    let a_inv_sqrt = inv_sqrt_spd(a);
    let s = &a_inv_sqrt * l * &a_inv_sqrt;
    let (mut num, mut den) = (0.0, 0.0);
    for (p, op) in ensemble.outcomes() {
        let whitened = symmetrize(&a_inv_sqrt * op.to_dense() * &a_inv_sqrt);
        let alpha = max_eig(&whitened).max(1.0);
        let x = DMatrix::identity(n, n) - whitened / alpha;
        let window = Window::new(WindowKind::shifted(alpha)?, order)?;
        let mut power = DMatrix::identity(n, n);
        let mut terms = Vec::with_capacity(order + 1);
        for _ in 0..=order {
            terms.push(trace_product(&s, &power));
            power = &power * &x;
        }
        let (wn, wd) = window.weigh(&terms);
        let scale = p / (alpha * alpha);
        num += scale * wn;
        den += scale * wd;
    }
    if !(den > 0.0) {
        return Err(Error::DegenerateDenominator);
    }
    Ok(num / den)
}

/// Order-2 truncated factor from the closed-form expressions in `Ẑ = Â − A`,
/// with `+A⁻¹ẐA⁻¹` linear terms. Agrees with [`exact_truncated_factor`] when
/// `E[Ẑ] = 0`.
pub fn explicit_order_two(
    ensemble: &DiscreteEnsemble,
    a: &DMatrix<f64>,
    l: &DMatrix<f64>,
    kind: WindowKind,
) -> Result<f64> {
    let n = check_dim(ensemble, a)?;
    check_square(l, n)?;
    let a_inv = inverse_spd(a)?;
    let mut q1 = DMatrix::zeros(n, n);
    let mut q2 = DMatrix::zeros(n, n);
    for (p, op) in ensemble.outcomes() {
        let z = op.to_dense() - a;
        let first = &a_inv * &z * &a_inv;
        q2 += &first * &z * &a_inv * *p;
        q1 += first * *p;
    }
    let (t0, t1, t2) = (trace_product(l, &a_inv), trace_product(l, &q1), trace_product(l, &q2));
    let (num, den) = match kind {
        WindowKind::Soft => (0.5 * t2 + t1, t2 + 2.0 * t1 + t0),
        WindowKind::Hard => (2.0 * t2 + t1, 3.0 * t2 + 2.0 * t1 + t0),
        WindowKind::Shifted { .. } => {
            return Err(Error::InvalidParameter("explicit formulas exist for soft and hard windows only".into()))
        }
    };
    if !(den > 0.0) {
        return Err(Error::DegenerateDenominator);
    }
    Ok(num / den)
}

/// Exact relative errors `(E‖x̃ − x‖² / E‖x‖², E‖x̃ − x‖²_A / E‖x‖²_A)` of
/// `x̃ = (1 − β) Â⁻¹ b` with `b ~ N(0, I)`.
pub fn exact_energy_errors(ensemble: &DiscreteEnsemble, a: &DMatrix<f64>, beta: f64) -> Result<(f64, f64)> {
    check_dim(ensemble, a)?;
    let a_inv = inverse_spd(a)?;
    let (mut l2, mut energy) = (0.0, 0.0);
    for (p, op) in ensemble.outcomes() {
        let d = inverse_spd(&op.to_dense())? * (1.0 - beta) - &a_inv;
        l2 += p * trace_product(&d, &d);
        energy += p * trace_product(&(&d * a), &d);
    }
    Ok((l2 / trace_product(&a_inv, &a_inv), energy / a_inv.trace()))
}
