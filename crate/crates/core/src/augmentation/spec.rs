use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use super::window::WindowKind;
use crate::linalg::{dot, Factorization, ProbeCorrelation};
use crate::{Error, Result};

const COMMUTATOR_TOL: f64 = 1e-10;

/// How `β` is chosen and which auxiliary operator `K̂` it multiplies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// No augmentation, `β = 0`.
    Naive,
    /// `K̂ = b bᵀ Â⁻¹`.
    Basic,
    /// `K̂ = R Â⁻¹ B`, untruncated bootstrap factor.
    Ag,
    /// `K̂ = Â⁻¹ C`, untruncated energy-norm factor.
    Eag,
    /// Energy-norm factor from a soft-windowed series of order `n`.
    TeagSoft(usize),
    /// Energy-norm factor from a hard-windowed series of order `n`.
    TeagHard(usize),
    /// Energy-norm factor with a per-sample shifted series of order `n`.
    AstEag(usize),
}

impl Method {
    /// Highest power of a bootstrap sample in the estimator, as reported in
    /// tables. Zero for untruncated methods.
    pub fn report_order(&self) -> usize {
        match *self {
            Self::TeagSoft(n) | Self::TeagHard(n) => 2 * n,
            Self::AstEag(n) => n,
            _ => 0,
        }
    }

    pub fn window(&self) -> Option<WindowKind> {
        match self {
            Self::TeagSoft(_) => Some(WindowKind::Soft),
            Self::TeagHard(_) => Some(WindowKind::Hard),
            Self::AstEag(_) => Some(WindowKind::Shifted { alpha: 1.0 }),
            _ => None,
        }
    }

    /// Report name without order, e.g. `T-EAG-S`.
    pub fn label(&self) -> &'static str {
        match self {
            Self::Naive => "Naive",
            Self::Basic => "Basic",
            Self::Ag => "AG",
            Self::Eag => "EAG",
            Self::TeagSoft(_) => "T-EAG-S",
            Self::TeagHard(_) => "T-EAG-H",
            Self::AstEag(_) => "AST-EAG",
        }
    }

    /// Whether the method uses the energy-norm auxiliary operator.
    pub fn is_energy(&self) -> bool {
        matches!(self, Self::Eag | Self::TeagSoft(_) | Self::TeagHard(_) | Self::AstEag(_))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Naive => write!(f, "naive"),
            Self::Basic => write!(f, "basic"),
            Self::Ag => write!(f, "ag"),
            Self::Eag => write!(f, "eag"),
            Self::TeagSoft(_) => write!(f, "teag-s:{}", self.report_order()),
            Self::TeagHard(_) => write!(f, "teag-h:{}", self.report_order()),
            Self::AstEag(_) => write!(f, "asteag:{}", self.report_order()),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    /// Parses `naive`, `basic`, `ag`, `eag`, `teag-s:K`, `teag-h:K` or
    /// `asteag:K`, where `K` is the report order (even for T-EAG).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown method {s:?}"));
        let (tag, arg) = s.trim().split_once(':').map_or((s.trim(), None), |(t, a)| (t, Some(a)));
        let order = match arg {
            None => None,
            Some(a) => Some(a.trim().parse::<usize>().map_err(|_| bad())?),
        };
        let method = match (tag, order) {
            ("naive", None) => Self::Naive,
            ("basic", None) => Self::Basic,
            ("ag", None) => Self::Ag,
            ("eag", None) => Self::Eag,
            ("teag-s" | "teag-h", Some(k)) => {
                if k == 0 || k % 2 != 0 {
                    return Err(Error::Config(format!("{s:?}: T-EAG order must be a positive even number")));
                }
                if tag == "teag-s" {
                    Self::TeagSoft(k / 2)
                } else {
                    Self::TeagHard(k / 2)
                }
            }
            ("asteag", Some(k)) if k >= 1 => Self::AstEag(k),
            ("asteag", Some(_)) => return Err(Error::Config(format!("{s:?}: AST-EAG order must be positive"))),
            _ => return Err(bad()),
        };
        Ok(method)
    }
}

/// Norm and prior matrices `R`, `B`, `C`; `None` stands for the identity.
#[derive(Clone, Debug)]
pub struct Weights {
    n: usize,
    r: Option<DMatrix<f64>>,
    b: Option<DMatrix<f64>>,
    c: Option<DMatrix<f64>>,
    w: ProbeCorrelation,
    bw: ProbeCorrelation,
    l: ProbeCorrelation,
}

fn product(a: &Option<DMatrix<f64>>, b: &Option<DMatrix<f64>>) -> Option<DMatrix<f64>> {
    match (a, b) {
        (None, None) => None,
        (Some(m), None) | (None, Some(m)) => Some(m.clone()),
        (Some(x), Some(y)) => Some(x * y),
    }
}

fn correlation(n: usize, m: Option<DMatrix<f64>>) -> Result<ProbeCorrelation> {
    match m {
        None => Ok(ProbeCorrelation::identity(n)),
        Some(m) => ProbeCorrelation::new(&((&m + m.transpose()) * 0.5)),
    }
}

impl Weights {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            r: None,
            b: None,
            c: None,
            w: ProbeCorrelation::identity(n),
            bw: ProbeCorrelation::identity(n),
            l: ProbeCorrelation::identity(n),
        }
    }

    /// Checks that each matrix is symmetric positive semidefinite and that
    /// `R` commutes with `B` and `C`.
    pub fn new(
        n: usize,
        r: Option<DMatrix<f64>>,
        b: Option<DMatrix<f64>>,
        c: Option<DMatrix<f64>>,
    ) -> Result<Self> {
        for m in [&r, &b, &c].into_iter().flatten() {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.nrows().max(m.ncols()) });
            }
            let scale = m.amax().max(f64::MIN_POSITIVE);
            if (m - m.transpose()).amax() > 1e-12 * scale {
                return Err(Error::NotSymmetric { asymmetry: (m - m.transpose()).amax() / scale });
            }
            ProbeCorrelation::new(m)?;
        }
        if let Some(rm) = &r {
            for other in [&b, &c].into_iter().flatten() {
                let comm = (rm * other - other * rm).norm();
                if comm > COMMUTATOR_TOL {
                    return Err(Error::NonCommuting(comm));
                }
            }
        }
        let w = product(&r, &b);
        let bw = product(&b, &w);
        let l = product(&c, &r);
        Ok(Self { n, w: correlation(n, w)?, bw: correlation(n, bw)?, l: correlation(n, l)?, r, b, c })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Probe correlation `W = RB`.
    pub fn w(&self) -> &ProbeCorrelation {
        &self.w
    }

    /// Probe correlation `BW`.
    pub fn bw(&self) -> &ProbeCorrelation {
        &self.bw
    }

    /// Probe correlation `L = CR`.
    pub fn l(&self) -> &ProbeCorrelation {
        &self.l
    }

    fn apply(m: &Option<DMatrix<f64>>, x: &[f64]) -> Vec<f64> {
        match m {
            None => x.to_vec(),
            Some(m) => (m * DVector::from_column_slice(x)).as_slice().to_vec(),
        }
    }

    pub fn apply_r(&self, x: &[f64]) -> Vec<f64> {
        Self::apply(&self.r, x)
    }

    pub fn apply_b(&self, x: &[f64]) -> Vec<f64> {
        Self::apply(&self.b, x)
    }

    pub fn apply_c(&self, x: &[f64]) -> Vec<f64> {
        Self::apply(&self.c, x)
    }

    /// `xᵀ M y` for `M = W` or `M = RW`.
    pub(crate) fn w_inner(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.apply_r(&self.apply_b(y)))
    }

    pub(crate) fn rw_inner(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.apply_r(&self.apply_r(&self.apply_b(y))))
    }
}

/// `(Â⁻¹ − βK̂) b` for the auxiliary operator of `method`.
pub fn augmented_solve(
    observed: &Factorization,
    method: Method,
    weights: &Weights,
    beta: f64,
    b: &[f64],
) -> Result<Vec<f64>> {
    let n = observed.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    if weights.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: weights.dim() });
    }
    if !beta.is_finite() {
        return Err(Error::NonFinite("augmentation factor"));
    }
    let mut x = observed.solve(b)?;
    if beta == 0.0 {
        return Ok(x);
    }
    let correction = match method {
        Method::Naive => return Ok(x),
        Method::Basic => {
            let s = dot(b, &x);
            b.iter().map(|v| v * s).collect()
        }
        Method::Ag => weights.apply_r(&observed.solve(&weights.apply_b(b))?),
        _ => match weights.c {
            None => x.clone(),
            Some(_) => observed.solve(&weights.apply_c(b))?,
        },
    };
    x.iter_mut().zip(&correction).for_each(|(a, c)| *a -= beta * c);
    Ok(x)
}
