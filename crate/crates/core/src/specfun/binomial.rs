use super::gamma::ln_gamma;
use super::Probability;
use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};

/// Binomial CDF `P(X ≤ k)` for `X ~ Bin(n, p)`; `k = -1` gives 0.
pub fn binom_cdf<T: Real>(k: i64, n: u64, p: Probability<T>) -> Result<Probability<T>> {
    let (lower, upper) = split_mass(k, n, p.get())?;
    Probability::new(if lower <= upper {
        lower
    } else {
        T::one() - upper
    })
}

/// Binomial survival function `P(X > k)`, accurate in the far upper tail.
pub fn binom_sf<T: Real>(k: i64, n: u64, p: Probability<T>) -> Result<Probability<T>> {
    let (lower, upper) = split_mass(k, n, p.get())?;
    Probability::new(if upper <= lower {
        upper
    } else {
        T::one() - lower
    })
}

/// Binomial probability mass `P(X = j)`.
pub fn binom_pmf<T: Real>(j: u64, n: u64, p: Probability<T>) -> T {
    if j > n {
        return T::zero();
    }
    let p = p.get();
    let (jf, nf) = (T::lit(j as f64), T::lit(n as f64));
    if p == T::zero() {
        return if j == 0 { T::one() } else { T::zero() };
    }
    if p == T::one() {
        return if j == n { T::one() } else { T::zero() };
    }
    let ln_choose =
        ln_gamma(nf + T::one()) - ln_gamma(jf + T::one()) - ln_gamma(nf - jf + T::one());
    (ln_choose + jf * p.ln() + (nf - jf) * (-p).ln_1p()).exp()
}

// Returns (P(X ≤ k), P(X > k)), each normalized by the total mass so the pair
// sums to one up to rounding. Terms are generated by the pmf ratio recurrence
// outward from the mode, with the mode term fixed at 1; no factorials needed.
fn split_mass<T: Real>(k: i64, n: u64, p: T) -> Result<(T, T)> {
    if k < -1 || k > n as i64 {
        return Err(Error::domain(format!(
            "binomial CDF needs -1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    if k == -1 {
        return Ok((T::zero(), T::one()));
    }
    if k == n as i64 {
        return Ok((T::one(), T::zero()));
    }
    if p == T::zero() {
        return Ok((T::one(), T::zero()));
    }
    if p == T::one() {
        return Ok((T::zero(), T::one()));
    }
    let k = k as u64;
    let odds = p / (T::one() - p);
    let nf = T::lit(n as f64);
    let mode = (((nf + T::one()) * p).floor().as_f64() as u64).min(n);
    let negligible = T::min_positive_value();

    let mut lower = CompensatedSum::new();
    let mut upper = CompensatedSum::new();
    let mut push = |j: u64, term: T| {
        if j <= k {
            lower.add(term);
        } else {
            upper.add(term);
        }
    };

    push(mode, T::one());
    let mut term = T::one();
    for j in (mode + 1)..=n {
        let jf = T::lit(j as f64);
        term = term * (nf - jf + T::one()) / jf * odds;
        if term < negligible {
            break;
        }
        push(j, term);
    }
    let mut term = T::one();
    for j in (0..mode).rev() {
        let jf = T::lit(j as f64);
        term = term * (jf + T::one()) / (nf - jf) / odds;
        if term < negligible {
            break;
        }
        push(j, term);
    }
    let (lo, up) = (lower.value(), upper.value());
    let total = lo + up;
    Ok((lo / total, up / total))
}
