#![allow(clippy::excessive_precision)]

use super::{check_finite, Settings};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Kummer's confluent hypergeometric function `₁F₁(a; b; z)`.
pub fn kummer_1f1<T: Real>(a: T, b: T, z: T) -> Result<T> {
    kummer_1f1_with(a, b, z, &Settings::default())
}

/// `₁F₁(a; b; z) = Σ_n (a)_n / (b)_n · zⁿ / n!`.
///
/// Positive arguments are summed directly: with `a, b > 0` every term is
/// positive. Negative arguments below `-1` go through Kummer's transformation
/// `₁F₁(a; b; z) = e^z ₁F₁(b − a; b; −z)` so the summed series is again
/// (eventually) positive instead of alternating.
pub fn kummer_1f1_with<T: Real>(a: T, b: T, z: T, settings: &Settings) -> Result<T> {
    check_finite("a", a)?;
    check_finite("b", b)?;
    check_finite("z", z)?;
    if b <= T::zero() && b == b.floor() {
        return Err(Error::domain(format!("1F1 has a pole at b = {b}")));
    }
    if z == T::zero() || a == T::zero() {
        return Ok(T::one());
    }
    let terminating = |p: T| p < T::zero() && p == p.floor();
    if z < -T::one() && !terminating(a) {
        let inner = series(b - a, b, -z, settings)?;
        return Ok(z.exp() * inner);
    }
    series(a, b, z, settings)
}

fn series<T: Real>(a: T, b: T, z: T, settings: &Settings) -> Result<T> {
    let mut term = T::one();
    let mut sum = T::one();
    let mut max_term = T::one();
    for n in 0..settings.max_iter {
        let nf = T::from_usize_lossy(n);
        let num = a + nf;
        if num == T::zero() {
            return Ok(sum);
        }
        term = term * num / (b + nf) * z / (nf + T::one());
        sum = sum + term;
        max_term = max_term.max(term.abs());
        // the ratio test |(a+n) z / ((b+n)(n+1))| < 1 guarantees decay from here on
        let ratio = ((a + nf + T::one()) * z / ((b + nf + T::one()) * (nf + T::lit(2.0)))).abs();
        if ratio < T::one() && term.abs() <= T::epsilon() * sum.abs() {
            return Ok(sum);
        }
        if !sum.is_finite() {
            break;
        }
    }
    Err(Error::Convergence {
        what: "1F1 power series",
        iterations: settings.max_iter,
    })
}
