use crate::{Error, Result};

/// Truncation window family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WindowKind {
    Soft,
    Hard,
    /// Expansion about `αA` with `η = 1 − α⁻¹`.
    Shifted { alpha: f64 },
}

impl WindowKind {
    pub fn shifted(alpha: f64) -> Result<Self> {
        if alpha >= 1.0 && alpha.is_finite() {
            Ok(Self::Shifted { alpha })
        } else {
            Err(Error::InvalidShift(alpha))
        }
    }

    /// `η = 1 − α⁻¹`, zero for unshifted windows.
    pub fn eta(&self) -> f64 {
        match *self {
            Self::Shifted { alpha } => 1.0 - 1.0 / alpha,
            _ => 0.0,
        }
    }

    /// Short tag used in reports.
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Soft => "soft",
            Self::Hard => "hard",
            Self::Shifted { .. } => "shifted",
        }
    }

    /// Largest `k` with nonzero weight at order `n`.
    pub fn support(&self, n: usize) -> usize {
        match self {
            Self::Soft | Self::Hard => 2 * n,
            Self::Shifted { .. } => n,
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        if n < 1 {
            return Err(Error::InvalidOrder(n));
        }
        if let Self::Shifted { alpha } = *self {
            if !(alpha >= 1.0 && alpha.is_finite()) {
                return Err(Error::InvalidShift(alpha));
            }
        }
        Ok(())
    }
}

/// Numerator weight `w_N(k)`.
pub fn window(kind: WindowKind, n: usize, k: usize) -> Result<f64> {
    kind.check(n)?;
    let kf = k as f64;
    Ok(match kind {
        WindowKind::Soft if k < 2 * n => kf,
        WindowKind::Soft if k == 2 * n => (kf - 1.0) / 2.0,
        WindowKind::Hard if k <= 2 * n => kf,
        WindowKind::Shifted { .. } if k <= n => {
            let eta = kind.eta();
            let geometric: f64 = (0..=n - k).map(|i| eta.powi(i as i32)).sum();
            (kf + 1.0) - geometric
        }
        _ => 0.0,
    })
}

/// Denominator weight `w̄_N(k)`.
pub fn window_bar(kind: WindowKind, n: usize, k: usize) -> Result<f64> {
    kind.check(n)?;
    let kf = k as f64;
    Ok(match kind {
        WindowKind::Soft if k < 2 * n => kf + 1.0,
        WindowKind::Soft if k == 2 * n => kf / 2.0,
        WindowKind::Hard if k <= 2 * n => kf + 1.0,
        WindowKind::Shifted { .. } if k <= n => kf + 1.0,
        _ => 0.0,
    })
}

/// Both weight sequences over the support of a window.
#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    kind: WindowKind,
    order: usize,
    numerator: Vec<f64>,
    denominator: Vec<f64>,
}

impl Window {
    pub fn new(kind: WindowKind, order: usize) -> Result<Self> {
        kind.check(order)?;
        let support = kind.support(order);
        let numerator = (0..=support).map(|k| window(kind, order, k)).collect::<Result<_>>()?;
        let denominator = (0..=support).map(|k| window_bar(kind, order, k)).collect::<Result<_>>()?;
        Ok(Self { kind, order, numerator, denominator })
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Highest series index used.
    pub fn support(&self) -> usize {
        self.numerator.len() - 1
    }

    pub fn numerator(&self) -> &[f64] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[f64] {
        &self.denominator
    }

    /// `(Σ w(k) t_k, Σ w̄(k) t_k)` over the support.
    pub fn weigh(&self, terms: &[f64]) -> (f64, f64) {
        let num = self.numerator.iter().zip(terms).map(|(w, t)| w * t).sum();
        let den = self.denominator.iter().zip(terms).map(|(w, t)| w * t).sum();
        (num, den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn soft_order_one() {
        let s = WindowKind::Soft;
        assert_eq!(window(s, 1, 1).unwrap(), 1.0);
        assert_eq!(window(s, 1, 2).unwrap(), 0.5);
        assert_eq!(window_bar(s, 1, 2).unwrap(), 1.0);
        assert_eq!(window(s, 1, 3).unwrap(), 0.0);
        assert_eq!(window_bar(s, 1, 3).unwrap(), 0.0);
    }

    #[test]
    fn hard_order_one() {
        let h = WindowKind::Hard;
        assert_eq!(window(h, 1, 2).unwrap(), 2.0);
        assert_eq!(window_bar(h, 1, 2).unwrap(), 3.0);
        assert_eq!(window(h, 1, 3).unwrap(), 0.0);
    }

    #[test]
    fn shifted_without_shift_is_hard() {
        let s = WindowKind::shifted(1.0).unwrap();
        for n in 1..6 {
            for k in 0..=n {
                assert_eq!(window(s, n, k).unwrap(), k as f64);
                assert_eq!(window(s, n, k).unwrap(), window(WindowKind::Hard, n, k).unwrap());
            }
            assert_eq!(window(s, n, n + 1).unwrap(), 0.0);
        }
    }

    #[test]
    fn shifted_value() {
        let s = WindowKind::shifted(2.0).unwrap();
        assert_eq!(s.eta(), 0.5);
        assert_eq!(window(s, 2, 0).unwrap(), -0.75);
    }

    #[test]
    fn errors() {
        assert!(matches!(window(WindowKind::Soft, 0, 0), Err(Error::InvalidOrder(0))));
        assert!(matches!(WindowKind::shifted(0.5), Err(Error::InvalidShift(_))));
        assert!(matches!(window(WindowKind::Shifted { alpha: 0.9 }, 1, 0), Err(Error::InvalidShift(_))));
    }

    #[test]
    fn window_table() {
        let w = Window::new(WindowKind::Soft, 2).unwrap();
        assert_eq!(w.numerator(), &[0.0, 1.0, 2.0, 3.0, 1.5]);
        assert_eq!(w.denominator(), &[1.0, 2.0, 3.0, 4.0, 2.0]);
        assert_eq!(w.weigh(&[1.0, 0.0, 1.0, 0.0, 1.0]), (3.5, 6.0));
    }

    proptest! {
        #[test]
        fn numerator_below_denominator(n in 1usize..40, k in 0usize..100, alpha in 1.0f64..10.0) {
            for kind in [WindowKind::Soft, WindowKind::Hard, WindowKind::Shifted { alpha }] {
                prop_assert!(window(kind, n, k).unwrap() <= window_bar(kind, n, k).unwrap());
            }
            let s = WindowKind::Shifted { alpha };
            if k <= n {
                prop_assert_eq!(window_bar(s, n, k).unwrap(), k as f64 + 1.0);
            }
        }

        #[test]
        fn soft_converges_pointwise(k in 0usize..50) {
            let n = k + 1;
            prop_assert_eq!(window(WindowKind::Soft, n, k).unwrap(), k as f64);
            prop_assert_eq!(window_bar(WindowKind::Soft, n, k).unwrap(), k as f64 + 1.0);
        }
    }
}
