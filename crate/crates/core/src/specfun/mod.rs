//! Scalar special functions used by every detection formula: the regularized
//! upper incomplete gamma function, the generalized Marcum Q-function, the
//! binomial CDF and Kummer's confluent hypergeometric function.
//!
//! All routines are pure; the only tunables live in [`Settings`].

mod binomial;
mod gamma;
mod hypergeometric;
mod marcum;

pub use binomial::{binom_cdf, binom_pmf, binom_sf};
pub use gamma::{ln_gamma, regularized_gamma_pair, regularized_upper_gamma, UpperGammaLadder};
pub use hypergeometric::{kummer_1f1, kummer_1f1_with};
pub use marcum::{marcum_q, marcum_q_with};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Series tolerances shared by every iterative routine in the crate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Settings {
    /// Absolute tolerance on truncated series.
    pub abs_tol: f64,
    /// Hard cap on series / continued-fraction iterations.
    pub max_iter: usize,
}

impl Settings {
    pub const DEFAULT_ABS_TOL: f64 = 1e-12;
    pub const DEFAULT_MAX_ITER: usize = 10_000;

    pub fn with_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            abs_tol: Self::DEFAULT_ABS_TOL,
            max_iter: Self::DEFAULT_MAX_ITER,
        }
    }
}

/// A value in `[0, 1]`.
///
/// Construction clamps values that miss the interval by rounding only
/// (at most `1e-12`, or a few ulps for `f32`); anything further out is an error.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Probability<T>(T);

impl<T: Real> Probability<T> {
    pub fn new(value: T) -> Result<Self> {
        if value.is_nan() {
            return Err(Error::domain("probability is NaN"));
        }
        let slack = T::lit(1e-12).max(T::epsilon() * T::lit(8.0));
        if value < -slack || value > T::one() + slack {
            return Err(Error::domain(format!("probability {value} outside [0, 1]")));
        }
        Ok(Self(value.max(T::zero()).min(T::one())))
    }

    pub fn zero() -> Self {
        Self(T::zero())
    }

    pub fn one() -> Self {
        Self(T::one())
    }

    #[inline]
    pub fn get(self) -> T {
        self.0
    }

    #[inline]
    pub fn complement(self) -> Self {
        Self(T::one() - self.0)
    }
}

impl<T: Real> TryFrom<f64> for Probability<T> {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(T::lit(value))
    }
}

pub(crate) fn check_finite<T: Real>(what: &str, x: T) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} must be finite, got {x}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probability_clamps_rounding_only() {
        assert_eq!(Probability::new(1.0 + 5e-13).unwrap().get(), 1.0);
        assert_eq!(Probability::new(-5e-13).unwrap().get(), 0.0);
        assert!(Probability::new(1.0 + 1e-9).is_err());
        assert!(Probability::new(-1e-6).is_err());
        assert!(Probability::new(f64::NAN).is_err());
        assert!(Probability::<f32>::new(1.0 + 2.0 * f32::EPSILON).is_ok());
    }

    #[test]
    fn settings_defaults() {
        let s = Settings::default();
        assert_eq!(s.abs_tol, 1e-12);
        assert_eq!(s.max_iter, 10_000);
    }
}
