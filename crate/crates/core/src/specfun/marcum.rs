#![allow(clippy::excessive_precision)]

use super::gamma::{ln_gamma, UpperGammaLadder};
use super::{check_finite, Probability, Settings};
use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};

/// Generalized Marcum Q-function `Q_u(a, b)` at the default tolerance.
pub fn marcum_q<T: Real>(u: T, a: T, b: T) -> Result<Probability<T>> {
    marcum_q_with(u, a, b, &Settings::default())
}

/// Generalized Marcum Q-function via its Poisson mixture of upper incomplete
/// gamma functions:
///
/// `Q_u(a, b) = Σ_l e^{-a²/2} (a²/2)^l / l! · Q(u + l, b²/2)`.
///
/// Summation starts at the Poisson mode and walks outward in both directions,
/// so the cost is `O(√(a²/2))` terms rather than `O(a²/2)`. Each direction
/// stops once a geometric bound on the unvisited Poisson mass (with the gamma
/// factor bounded by one) falls below half of `settings.abs_tol`.
pub fn marcum_q_with<T: Real>(u: T, a: T, b: T, settings: &Settings) -> Result<Probability<T>> {
    check_finite("order", u)?;
    check_finite("a", a)?;
    check_finite("b", b)?;
    if u <= T::zero() {
        return Err(Error::domain(format!(
            "Marcum order must be positive, got {u}"
        )));
    }
    if a < T::zero() || b < T::zero() {
        return Err(Error::domain("Marcum arguments must be non-negative"));
    }
    if b == T::zero() {
        return Ok(Probability::one());
    }
    let y = b * b * T::lit(0.5);
    let mu = a * a * T::lit(0.5);
    if mu == T::zero() {
        let (_, q) = super::gamma::regularized_gamma_pair_with(u, y, settings)?;
        return Probability::new(q);
    }

    let half_tol = T::lit(settings.abs_tol * 0.5);
    let ln_mu = mu.ln();
    let mode = mu.floor();
    let ln_w_mode = mode * ln_mu - mu - ln_gamma(mode + T::one());
    let start = UpperGammaLadder::with_settings(u + mode, y, settings)?;

    // ln_w_mode carries an absolute rounding error of order eps·mu, so the
    // visited weights are renormalized by their own sum at the end.
    let mut sum = CompensatedSum::new();
    let mut mass = CompensatedSum::new();
    let mut iterations = 0usize;

    // upward from the mode, inclusive
    let mut ladder = start.clone();
    let mut ln_w = ln_w_mode;
    let mut l = mode;
    loop {
        let w = ln_w.exp();
        sum.add(w * ladder.upper());
        mass.add(w);
        ln_w = ln_w + ln_mu - (l + T::one()).ln();
        l = l + T::one();
        ladder.step_up();
        iterations += 1;
        // weights past the mode shrink by at least mu / (l + 1) per step
        let ratio = mu / (l + T::one());
        if ratio < T::one() && ln_w.exp() / (T::one() - ratio) <= half_tol {
            break;
        }
        if iterations >= settings.max_iter {
            return Err(Error::Convergence {
                what: "Marcum Q series",
                iterations,
            });
        }
    }

    // downward from mode - 1
    let mut ladder = start;
    let mut ln_w = ln_w_mode;
    let mut l = mode;
    while l > T::zero() {
        ln_w = ln_w + l.ln() - ln_mu;
        ladder.step_down();
        l = l - T::one();
        let w = ln_w.exp();
        sum.add(w * ladder.upper());
        mass.add(w);
        iterations += 1;
        let ratio = l / mu;
        if ln_w.exp() * ratio / (T::one() - ratio) <= half_tol {
            break;
        }
        if iterations >= settings.max_iter {
            return Err(Error::Convergence {
                what: "Marcum Q series",
                iterations,
            });
        }
    }

    let mass = mass.value();
    let renormalize = (mass - T::one()).abs() <= T::lit(1e-6);
    Probability::new(if renormalize {
        sum.value() / mass
    } else {
        sum.value()
    })
}
