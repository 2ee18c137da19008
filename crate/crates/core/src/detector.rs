//! Single-node energy detection: false alarm, detection over AWGN and
//! detection averaged over an MG channel.
//!
//! With `y = λₙ/2`, a component of shape `β` and rate `ρ = ζ/γ₀` turns the
//! Poisson weights of the Marcum-Q series into negative-binomial weights:
//!
//! `P_d = Σ_k α_k Σ_l C(β_k+l−1, l) q_k^{β_k} p_k^l · Q(u+l, y)`
//!
//! with `p_k = 1/(1+ρ_k)` and `q_k = 1 − p_k`. At `λₙ = 0` every gamma ratio
//! is 1 and the inner sums are 1.

use rayon::prelude::*;

use crate::channel::{MgChannel, MgComponent};
use crate::error::{Error, Result};
use crate::quadrature::{exp_sinh, integrate_half_line, QuadSettings};
use crate::scalar::{CompensatedSum, Real};
use crate::specfun::{
    kummer_1f1_with, ln_gamma, marcum_q, regularized_upper_gamma, Probability, Settings,
    UpperGammaLadder,
};

/// Quadrature tolerance of the reference integral.
pub const QUADRATURE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorConfig<T> {
    /// Time-bandwidth product.
    pub u: T,
    /// Threshold normalized by the noise power.
    pub lambda_n: T,
}

impl<T: Real> DetectorConfig<T> {
    pub fn new(u: T, lambda_n: T) -> Result<Self> {
        if !(u.is_finite() && u > T::zero()) {
            return Err(Error::domain(format!("u must be positive, got {u}")));
        }
        if !(lambda_n.is_finite() && lambda_n >= T::zero()) {
            return Err(Error::domain(format!(
                "threshold must be non-negative, got {lambda_n}"
            )));
        }
        Ok(Self { u, lambda_n })
    }

    pub fn with_threshold(&self, lambda_n: T) -> Result<Self> {
        Self::new(self.u, lambda_n)
    }

    fn half_threshold(&self) -> T {
        self.lambda_n * T::lit(0.5)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesResult<T> {
    pub value: Probability<T>,
    pub terms_used: usize,
    /// Upper bound on the neglected tail.
    pub tail_bound: T,
}

/// `Γ(u, λₙ/2)/Γ(u)`. Does not depend on the channel.
pub fn prob_false_alarm<T: Real>(cfg: &DetectorConfig<T>) -> Result<Probability<T>> {
    Probability::new(regularized_upper_gamma(cfg.u, cfg.half_threshold())?)
}

/// `Q_u(√(2γ), √λₙ)`.
pub fn prob_detect_awgn<T: Real>(cfg: &DetectorConfig<T>, gamma: T) -> Result<Probability<T>> {
    if gamma.is_nan() || gamma < T::zero() {
        return Err(Error::domain(format!(
            "SNR must be non-negative, got {gamma}"
        )));
    }
    marcum_q(cfg.u, (T::lit(2.0) * gamma).sqrt(), cfg.lambda_n.sqrt())
}

fn component_density<T: Real>(c: &MgComponent<T>, gamma0: T, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    let rate = c.rate(gamma0);
    (c.alpha.ln() + c.beta * rate.ln() - ln_gamma(c.beta) + (c.beta - T::one()) * x.ln() - rate * x)
        .exp()
}

fn weighted_awgn<T: Real>(
    c: &MgComponent<T>,
    cfg: &DetectorConfig<T>,
    gamma0: T,
    x: T,
) -> Result<T> {
    let f = component_density(c, gamma0, x);
    if f == T::zero() {
        return Ok(T::zero());
    }
    Ok(f * prob_detect_awgn(cfg, x)?.get())
}

/// Reference value: adaptive Gauss–Kronrod of `∫ P_d,AWGN(x) f(x) dx`, one
/// integral per component, to an overall absolute tolerance of 1e-9.
pub fn prob_detect_mg_quadrature<T: Real>(
    channel: &MgChannel<T>,
    cfg: &DetectorConfig<T>,
) -> Result<Probability<T>> {
    if cfg.lambda_n == T::zero() {
        return Ok(Probability::one());
    }
    let g0 = channel.gamma0();
    let per = QuadSettings {
        abs_tol: QUADRATURE_TOL / channel.components().len() as f64,
        ..Default::default()
    };
    let mut total = CompensatedSum::new();
    for c in channel.components() {
        let s = g0 / c.zeta;
        let mean = c.beta * s;
        let spread = s * c.beta.sqrt().max(T::one());
        let mut failure = None;
        let r = integrate_half_line(
            |x| {
                weighted_awgn(c, cfg, g0, x).unwrap_or_else(|e| {
                    failure.get_or_insert(e);
                    T::zero()
                })
            },
            mean,
            spread,
            &per,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        total.add(r.value);
    }
    Probability::new(total.value())
}

/// The same integral by double-exponential (exp-sinh) quadrature. Used as an
/// independent check on [`prob_detect_mg_quadrature`].
pub fn prob_detect_mg_exp_sinh<T: Real>(
    channel: &MgChannel<T>,
    cfg: &DetectorConfig<T>,
) -> Result<Probability<T>> {
    if cfg.lambda_n == T::zero() {
        return Ok(Probability::one());
    }
    let g0 = channel.gamma0();
    let tol = QUADRATURE_TOL / channel.components().len() as f64;
    let mut total = CompensatedSum::new();
    for c in channel.components() {
        let mean = c.beta * g0 / c.zeta;
        let mut failure = None;
        let r = exp_sinh(
            |x| {
                weighted_awgn(c, cfg, g0, x).unwrap_or_else(|e| {
                    failure.get_or_insert(e);
                    T::zero()
                })
            },
            mean,
            tol,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        total.add(r.value);
    }
    Probability::new(total.value())
}

// Negative-binomial weights of one component, walked in log space.
#[derive(Clone, Debug)]
struct NbWalk<T> {
    alpha: T,
    beta: T,
    ln_p: T,
    p: T,
    ln_w: T,
    l: usize,
}

impl<T: Real> NbWalk<T> {
    fn new(c: &MgComponent<T>, gamma0: T) -> Self {
        let rho = c.rate(gamma0);
        let ln_p = -rho.ln_1p();
        Self {
            alpha: c.alpha,
            beta: c.beta,
            ln_p,
            p: ln_p.exp(),
            ln_w: c.beta * (rho.ln() + ln_p),
            l: 0,
        }
    }

    fn weight(&self) -> T {
        self.ln_w.exp()
    }

    fn advance(&mut self) {
        let l = T::from_usize_lossy(self.l);
        self.ln_w = self.ln_w + ((self.beta + l) / (l + T::one())).ln() + self.ln_p;
        self.l += 1;
    }

    /// Geometric bound on the weight mass from the current index on, or
    /// `None` while the weights may still grow.
    fn remaining_bound(&self) -> Option<T> {
        let l = T::from_usize_lossy(self.l);
        let ratio = ((self.beta + l) / (l + T::one())).max(T::one()) * self.p;
        (ratio < T::one()).then(|| self.weight() / (T::one() - ratio))
    }
}

fn component_tail<T: Real>(c: &MgComponent<T>, gamma0: T, n: usize) -> T {
    let mut walk = NbWalk::new(c, gamma0);
    let mut head = CompensatedSum::new();
    for _ in 0..=n {
        head.add(walk.weight());
        walk.advance();
    }
    if head.value() < T::lit(0.5) {
        return (T::one() - head.value()).max(T::zero());
    }
    let mut tail = CompensatedSum::new();
    for _ in 0..1_000_000 {
        if let Some(rest) = walk.remaining_bound() {
            if rest <= T::epsilon() * tail.value() || rest < T::min_positive_value() {
                break;
            }
        }
        tail.add(walk.weight());
        walk.advance();
    }
    tail.value()
}

/// Bound on the error of the series truncated after term `n`: the exact
/// negative-binomial tail beyond `n` of every component, weighted by `α_k`.
/// The gamma ratios in the neglected terms are bounded by 1, so the bound
/// holds for every `u` and `λₙ`.
pub fn truncation_bound<T: Real>(channel: &MgChannel<T>, n: usize) -> T {
    let g0 = channel.gamma0();
    channel
        .components()
        .iter()
        .map(|c| c.alpha * component_tail(c, g0, n))
        .sum()
}

/// Series truncated after term `n` (terms `0..=n`).
pub fn series_partial_sum<T: Real>(
    channel: &MgChannel<T>,
    cfg: &DetectorConfig<T>,
    n: usize,
) -> Result<T> {
    let g0 = channel.gamma0();
    let mut total = CompensatedSum::new();
    for c in channel.components() {
        let mut walk = NbWalk::new(c, g0);
        let mut ladder = UpperGammaLadder::new(cfg.u, cfg.half_threshold())?;
        for _ in 0..=n {
            total.add(walk.alpha * walk.weight() * ladder.upper());
            walk.advance();
            ladder.step_up();
        }
    }
    Ok(total.value())
}

/// Infinite-series `P_d` over an MG channel, truncated once a tail bound
/// drops below `tol`. All components share the truncation index.
///
/// Two partial sums are carried along: `A = Σ w_l Q(u+l, y)` and
/// `B = Σ w_l P(u+l, y)`, with `P_d = A + R_A = 1 − B − R_B`. `R_A` is at
/// most the negative-binomial tail ([`truncation_bound`]); `R_B` is at most
/// `P(u+n+1, y)` times that tail. The second bound takes over at high SNR,
/// where the weights decay slowly but `P(u+l, y)` falls off factorially.
pub fn prob_detect_mg_series<T: Real>(
    channel: &MgChannel<T>,
    cfg: &DetectorConfig<T>,
    tol: T,
) -> Result<SeriesResult<T>> {
    prob_detect_mg_series_with(channel, cfg, tol, &Settings::default())
}

pub fn prob_detect_mg_series_with<T: Real>(
    channel: &MgChannel<T>,
    cfg: &DetectorConfig<T>,
    tol: T,
    settings: &Settings,
) -> Result<SeriesResult<T>> {
    if !(tol.is_finite() && tol > T::zero()) {
        return Err(Error::domain(format!(
            "series tolerance must be positive, got {tol}"
        )));
    }
    let g0 = channel.gamma0();
    let mut walks: Vec<NbWalk<T>> = channel
        .components()
        .iter()
        .map(|c| NbWalk::new(c, g0))
        .collect();
    let mut ladders = walks
        .iter()
        .map(|_| UpperGammaLadder::with_settings(cfg.u, cfg.half_threshold(), settings))
        .collect::<Result<Vec<_>>>()?;
    let mut upper_sum = CompensatedSum::new();
    let mut lower_sum = CompensatedSum::new();
    for n in 0..settings.max_iter {
        let mut nb_bound = T::zero();
        let mut lower_bound = T::zero();
        for (walk, ladder) in walks.iter_mut().zip(ladders.iter_mut()) {
            let w = walk.alpha * walk.weight();
            upper_sum.add(w * ladder.upper());
            lower_sum.add(w * ladder.lower());
            walk.advance();
            ladder.step_up();
            let tail = walk.remaining_bound().unwrap_or(T::infinity());
            nb_bound = nb_bound + walk.alpha * tail;
            lower_bound = lower_bound + walk.alpha * ladder.lower() * tail.min(T::one());
        }
        if nb_bound <= tol {
            return Ok(SeriesResult {
                value: Probability::new(upper_sum.value())?,
                terms_used: n + 1,
                tail_bound: truncation_bound(channel, n).min(nb_bound),
            });
        }
        if lower_bound <= tol {
            return Ok(SeriesResult {
                value: Probability::new(T::one() - lower_sum.value())?,
                terms_used: n + 1,
                tail_bound: lower_bound,
            });
        }
    }
    Err(Error::Convergence {
        what: "MG detection series",
        iterations: settings.max_iter,
    })
}

/// Finite form for integer shapes. Per component, with `y = λₙ/2`,
/// `p = 1/(1+ρ)` and `q = 1 − p`:
///
/// `P_k = Q(u, y) + e^{−y} y^u / Γ(u+1) · p · Σ_{l=0}^{β−1} q^l ₁F₁(l+1; u+1; p·y)`
///
/// The printed version of this formula has inconsistent exponents; this one
/// is obtained by summing the series above in closed form and reduces to
/// `exp(−y·q)` for `β = u = 1`.
pub fn prob_detect_mg_integer<T: Real>(
    channel: &MgChannel<T>,
    cfg: &DetectorConfig<T>,
) -> Result<Probability<T>> {
    let shapes = channel
        .components()
        .iter()
        .map(|c| {
            let b = c.beta.round();
            if (c.beta - b).abs() > T::lit(1e-9) || b < T::one() {
                Err(Error::NonIntegerShape(c.beta.as_f64()))
            } else {
                Ok(b.to_usize().unwrap_or(usize::MAX))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    if cfg.lambda_n == T::zero() {
        return Ok(Probability::one());
    }
    let settings = Settings::default();
    let y = cfg.half_threshold();
    let u = cfg.u;
    let q_u = regularized_upper_gamma(u, y)?;
    let prefactor = (u * y.ln() - y - ln_gamma(u + T::one())).exp();
    let g0 = channel.gamma0();
    let mut total = CompensatedSum::new();
    for (c, &beta) in channel.components().iter().zip(&shapes) {
        let rho = c.rate(g0);
        let p = T::one() / (T::one() + rho);
        let q = rho * p;
        let mut inner = CompensatedSum::new();
        let mut q_pow = T::one();
        for l in 0..beta {
            let a = T::from_usize_lossy(l + 1);
            inner.add(q_pow * kummer_1f1_with(a, u + T::one(), p * y, &settings)?);
            q_pow = q_pow * q;
        }
        total.add(c.alpha * (q_u + prefactor * p * inner.value()));
    }
    Probability::new(total.value())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RocPoint<T> {
    pub lambda_n: T,
    pub p_f: Probability<T>,
    pub p_d: Probability<T>,
    pub p_m: Probability<T>,
}

/// Complementary ROC over a threshold grid, evaluated in parallel with the
/// series at the default tolerance.
pub fn roc_sweep<T: Real>(
    channel: &MgChannel<T>,
    u: T,
    lambda_grid: &[T],
) -> Result<Vec<RocPoint<T>>> {
    if lambda_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let tol = T::lit(Settings::default().abs_tol);
    lambda_grid
        .par_iter()
        .map(|&lambda_n| {
            let cfg = DetectorConfig::new(u, lambda_n)?;
            let p_d = prob_detect_mg_series(channel, &cfg, tol)?.value;
            Ok(RocPoint {
                lambda_n,
                p_f: prob_false_alarm(&cfg)?,
                p_d,
                p_m: p_d.complement(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::preset_by_name;
    use approx::assert_abs_diff_eq;

    fn cfg(u: f64, l: f64) -> DetectorConfig<f64> {
        DetectorConfig::new(u, l).unwrap()
    }

    #[test]
    fn false_alarm_examples() {
        assert_eq!(prob_false_alarm(&cfg(5.0, 0.0)).unwrap().get(), 1.0);
        assert_abs_diff_eq!(
            prob_false_alarm(&cfg(1.0, 4.0)).unwrap().get(),
            (-2.0f64).exp(),
            epsilon = 1e-15
        );
        let x = 5.0f64;
        let poisson: f64 = (0..5)
            .map(|j| (-x).exp() * x.powi(j) / (1..=j).product::<i32>().max(1) as f64)
            .sum();
        assert_abs_diff_eq!(
            prob_false_alarm(&cfg(5.0, 10.0)).unwrap().get(),
            poisson,
            epsilon = 1e-13
        );
        assert!((poisson - 0.440493).abs() < 1e-6);
    }

    #[test]
    fn awgn_examples() {
        assert_eq!(prob_detect_awgn(&cfg(3.0, 0.0), 4.0).unwrap().get(), 1.0);
        assert_abs_diff_eq!(
            prob_detect_awgn(&cfg(1.0, 4.0), 0.0).unwrap().get(),
            (-2.0f64).exp(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            prob_detect_awgn(&cfg(1.0, 1.0), 0.5).unwrap().get(),
            0.732_879_803_796_820_2,
            epsilon = 1e-12
        );
        assert!(prob_detect_awgn(&cfg(1.0, 1.0), -0.5).is_err());
        assert!(DetectorConfig::new(0.0, 1.0).is_err());
        assert!(DetectorConfig::new(1.0, -1.0).is_err());
    }

    #[test]
    fn zero_threshold_detects_always() {
        let ch = preset_by_name("rayleigh_lognormal", None, Some(1.5), 3.0).unwrap();
        assert_eq!(
            prob_detect_mg_quadrature(&ch, &cfg(2.0, 0.0))
                .unwrap()
                .get(),
            1.0
        );
        let s = prob_detect_mg_series(&ch, &cfg(2.0, 0.0), 1e-10).unwrap();
        assert_abs_diff_eq!(s.value.get(), 1.0, epsilon = 1e-10);
        assert!(s.terms_used >= 1 && s.tail_bound <= 1e-10);
        assert_eq!(
            prob_detect_mg_integer(
                &preset_by_name("nakagami", Some(2.0), None, 1.0).unwrap(),
                &cfg(2.0, 0.0)
            )
            .unwrap()
            .get(),
            1.0
        );
    }

    #[test]
    fn exponential_closed_form() {
        // Rayleigh fading, u = 1: P_d = exp(−(λ/2)/(1+γ₀))
        let ch = preset_by_name("nakagami", Some(1.0), None, 4.0).unwrap();
        let c = cfg(1.0, 6.0);
        let exact = (-3.0f64 / 5.0).exp();
        assert_abs_diff_eq!(
            prob_detect_mg_integer(&ch, &c).unwrap().get(),
            exact,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            prob_detect_mg_quadrature(&ch, &c).unwrap().get(),
            exact,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            prob_detect_mg_series(&ch, &c, 1e-13).unwrap().value.get(),
            exact,
            epsilon = 1e-12
        );
    }

    #[test]
    fn integer_form_needs_integer_shapes() {
        let ch = preset_by_name("rayleigh", None, None, 1.0).unwrap();
        assert!(matches!(
            prob_detect_mg_integer(&ch, &cfg(1.0, 2.0)),
            Err(Error::NonIntegerShape(_))
        ));
    }

    #[test]
    fn point_mass_limit() {
        let ch =
            MgChannel::new(vec![MgComponent::new(1.0, 1e4, 1e4).unwrap()], 3.0, "spike").unwrap();
        let c = cfg(2.0, 8.0);
        let pd = prob_detect_mg_quadrature(&ch, &c).unwrap().get();
        assert_abs_diff_eq!(pd, prob_detect_awgn(&c, 3.0).unwrap().get(), epsilon = 1e-3);
    }

    #[test]
    fn series_iteration_cap() {
        let ch = preset_by_name("rayleigh_lognormal", None, Some(1.0), 1000.0).unwrap();
        let settings = Settings {
            max_iter: 5,
            ..Default::default()
        };
        assert!(matches!(
            prob_detect_mg_series_with(&ch, &cfg(1.0, 40.0), 1e-12, &settings),
            Err(Error::Convergence { .. })
        ));
        assert!(prob_detect_mg_series(&ch, &cfg(1.0, 2.0), 0.0).is_err());
    }

    #[test]
    fn roc_single_point() {
        let ch = preset_by_name("rayleigh", None, None, 1.0).unwrap();
        let r = roc_sweep(&ch, 2.0, &[0.0]).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].p_f.get(), 1.0);
        assert_abs_diff_eq!(r[0].p_d.get(), 1.0, epsilon = 1e-12);
        assert!(roc_sweep(&ch, 2.0, &[]).is_err());
    }
}
