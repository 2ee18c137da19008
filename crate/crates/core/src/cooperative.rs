//! Cooperative sensing: square-law selection over `M` antennas, reporting
//! over a binary symmetric channel, k-out-of-N fusion and the Bayesian risk
//! (total error rate, TER) built on top of them.

use rayon::prelude::*;

use crate::channel::MgChannel;
use crate::detector::{prob_detect_mg_series, prob_false_alarm, DetectorConfig};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::specfun::{binom_cdf, binom_pmf, binom_sf, Probability, Settings};

/// Relative tolerance under which two risks count as tied.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeConfig<T> {
    pub antennas_m: u32,
    /// Crossover probability of the reporting channel, at most 0.5.
    pub feedback_q: Probability<T>,
}

impl<T: Real> NodeConfig<T> {
    pub fn new(antennas_m: u32, feedback_q: T) -> Result<Self> {
        if antennas_m == 0 {
            return Err(Error::domain("antenna count must be at least 1"));
        }
        let q = Probability::new(feedback_q)?;
        if q.get() > T::lit(0.5) {
            return Err(Error::domain(format!(
                "feedback error probability must be at most 0.5, got {feedback_q}"
            )));
        }
        Ok(Self {
            antennas_m,
            feedback_q: q,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FusionConfig<T> {
    pub nodes_n: u32,
    pub rule_k: u32,
    /// Cost of a miss, `W_m`.
    pub cost_miss: T,
    /// Cost of a false alarm, `W_f`.
    pub cost_fa: T,
}

impl<T: Real> FusionConfig<T> {
    pub fn new(nodes_n: u32, rule_k: u32, cost_miss: T, cost_fa: T) -> Result<Self> {
        if nodes_n == 0 || rule_k == 0 || rule_k > nodes_n {
            return Err(Error::domain(format!(
                "need 1 <= k <= N, got k = {rule_k}, N = {nodes_n}"
            )));
        }
        for (name, w) in [("miss", cost_miss), ("false-alarm", cost_fa)] {
            if !(w.is_finite() && w > T::zero()) {
                return Err(Error::domain(format!(
                    "{name} cost must be positive, got {w}"
                )));
            }
        }
        Ok(Self {
            nodes_n,
            rule_k,
            cost_miss,
            cost_fa,
        })
    }

    pub fn with_k(&self, rule_k: u32) -> Result<Self> {
        Self::new(self.nodes_n, rule_k, self.cost_miss, self.cost_fa)
    }
}

/// Node-level (reported) and fusion-level probabilities with the resulting
/// TER.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensingMetrics<T> {
    pub p_f: Probability<T>,
    pub p_d: Probability<T>,
    pub q_f: Probability<T>,
    pub q_d: Probability<T>,
    pub q_m: Probability<T>,
    pub ter: T,
}

fn at_least_one<T: Real>(p: Probability<T>, m: T) -> Probability<T> {
    let p = p.get();
    if p >= T::one() {
        return Probability::one();
    }
    // 1 − (1−p)^M without cancellation for small p
    Probability::new(-(m * (-p).ln_1p()).exp_m1()).unwrap_or(Probability::one())
}

/// `1 − (1 − P_f)^M`.
pub fn sls_false_alarm<T: Real>(p_f: Probability<T>, m: u32) -> Probability<T> {
    at_least_one(p_f, T::from_u32(m).expect("u32 fits"))
}

/// `1 − (1 − P_d)^M` for i.i.d. branches.
pub fn sls_detect<T: Real>(p_d: Probability<T>, m: u32) -> Probability<T> {
    at_least_one(p_d, T::from_u32(m).expect("u32 fits"))
}

/// Probability that a decision bit arrives as "1" after the reporting
/// channel: `(1−q)·p + q·(1−p)`.
pub fn bsc_flip<T: Real>(p: Probability<T>, q: Probability<T>) -> Probability<T> {
    let (p, q) = (p.get(), q.get());
    Probability::new(p + q * (T::one() - T::lit(2.0) * p)).expect("convex combination")
}

pub fn fusion_metrics<T: Real>(
    p_f_rep: Probability<T>,
    p_d_rep: Probability<T>,
    fusion: &FusionConfig<T>,
) -> Result<SensingMetrics<T>> {
    let n = u64::from(fusion.nodes_n);
    let below = i64::from(fusion.rule_k) - 1;
    let q_f = binom_sf(below, n, p_f_rep)?;
    let q_m = binom_cdf(below, n, p_d_rep)?;
    let q_d = q_m.complement();
    Ok(SensingMetrics {
        p_f: p_f_rep,
        p_d: p_d_rep,
        q_f,
        q_d,
        q_m,
        ter: fusion.cost_fa * q_f.get() + fusion.cost_miss * q_m.get(),
    })
}

/// `R(k) = W_f − W_f·B(k−1; N, P'_f) + W_m·B(k−1; N, P'_d)`.
pub fn bayes_risk<T: Real>(
    fusion: &FusionConfig<T>,
    p_f_rep: Probability<T>,
    p_d_rep: Probability<T>,
) -> Result<T> {
    let n = u64::from(fusion.nodes_n);
    let below = i64::from(fusion.rule_k) - 1;
    Ok(
        fusion.cost_fa - fusion.cost_fa * binom_cdf(below, n, p_f_rep)?.get()
            + fusion.cost_miss * binom_cdf(below, n, p_d_rep)?.get(),
    )
}

fn better<T: Real>(candidate: T, best: T) -> bool {
    candidate < best - T::lit(TIE_TOL) * best.abs()
}

/// Minimizes `R(k)` over `k = 1..=N` by evaluating every `k`; ties go to the
/// smaller `k`.
pub fn optimal_k_exhaustive<T: Real>(
    n: u32,
    p_f_rep: Probability<T>,
    p_d_rep: Probability<T>,
    w_m: T,
    w_f: T,
) -> Result<(u32, T)> {
    let base = FusionConfig::new(n, 1, w_m, w_f)?;
    let mut best = (1, bayes_risk(&base, p_f_rep, p_d_rep)?);
    for k in 2..=n {
        let r = bayes_risk(&base.with_k(k)?, p_f_rep, p_d_rep)?;
        if better(r, best.1) {
            best = (k, r);
        }
    }
    Ok(best)
}

/// Closed-form optimal threshold: the smallest `k` with `R(k+1) ≥ R(k)`,
///
/// `k* = [ln(W_f/W_m) + N·ln((1−P'_f)/(1−P'_d))] / ln[P'_d(1−P'_f) / ((1−P'_d)P'_f)]`
///
/// rounded up and clamped to `[1, N]`. When `k*` is an integer the two
/// neighbouring thresholds are tied and the smaller one is returned.
pub fn optimal_k_closed<T: Real>(
    n: u32,
    p_f_rep: Probability<T>,
    p_d_rep: Probability<T>,
    w_m: T,
    w_f: T,
) -> Result<u32> {
    FusionConfig::new(n, 1, w_m, w_f)?;
    let (pf, pd) = (p_f_rep.get(), p_d_rep.get());
    if !(T::zero() < pf && pf < pd && pd < T::one()) {
        return Err(Error::domain(format!(
            "need 0 < P'_f < P'_d < 1, got P'_f = {pf}, P'_d = {pd}"
        )));
    }
    let nn = T::from_u32(n).expect("u32 fits");
    let num = (w_f / w_m).ln() + nn * ((-pf).ln_1p() - (-pd).ln_1p());
    let den = pd.ln() + (-pf).ln_1p() - (-pd).ln_1p() - pf.ln();
    let mut k_star = num / den;
    let nearest = k_star.round();
    if (k_star - nearest).abs() <= T::lit(1e-9) {
        k_star = nearest;
    }
    let k = k_star.ceil().max(T::one()).min(nn);
    Ok(k.to_u32().unwrap_or(1))
}

/// Reported false-alarm and detection probabilities of one node: detector,
/// then SLS over `M` antennas, then the reporting channel.
pub fn report_chain<T: Real>(
    channel: &MgChannel<T>,
    cfg: &DetectorConfig<T>,
    node: &NodeConfig<T>,
) -> Result<(Probability<T>, Probability<T>)> {
    let p_f = prob_false_alarm(cfg)?;
    let p_d = prob_detect_mg_series(channel, cfg, T::lit(Settings::default().abs_tol))?.value;
    Ok((
        bsc_flip(sls_false_alarm(p_f, node.antennas_m), node.feedback_q),
        bsc_flip(sls_detect(p_d, node.antennas_m), node.feedback_q),
    ))
}

/// Derivative in a continuous antenna count `M` of the reported probability
/// `bsc(1 − (1−p)^M, q)`: `(1−p)^M (2q−1) ln(1−p)`.
pub fn d_reported_dm<T: Real>(p_branch: Probability<T>, m: T, q: Probability<T>) -> Result<T> {
    let p = p_branch.get();
    if p <= T::zero() || p >= T::one() {
        return Err(Error::domain(format!(
            "branch probability must lie strictly inside (0, 1), got {p}"
        )));
    }
    Ok(reported_slope(p, m, q.get()))
}

fn reported_slope<T: Real>(p: T, m: T, q: T) -> T {
    if p <= T::zero() || p >= T::one() {
        return T::zero();
    }
    let l = (-p).ln_1p();
    (m * l).exp() * (T::lit(2.0) * q - T::one()) * l
}

/// TER as a function of a continuous antenna count, for fixed detector,
/// feedback and fusion settings.
#[derive(Clone, Copy, Debug)]
pub struct AntennaRisk<T> {
    p_f: Probability<T>,
    p_d: Probability<T>,
    q: Probability<T>,
    fusion: FusionConfig<T>,
}

impl<T: Real> AntennaRisk<T> {
    pub fn new(
        channel: &MgChannel<T>,
        cfg: &DetectorConfig<T>,
        q: Probability<T>,
        fusion: &FusionConfig<T>,
    ) -> Result<Self> {
        NodeConfig::new(1, q.get())?;
        let p_f = prob_false_alarm(cfg)?;
        let p_d = prob_detect_mg_series(channel, cfg, T::lit(Settings::default().abs_tol))?.value;
        Ok(Self::from_branch(p_f, p_d, q, *fusion))
    }

    /// From single-branch probabilities directly.
    pub fn from_branch(
        p_f: Probability<T>,
        p_d: Probability<T>,
        q: Probability<T>,
        fusion: FusionConfig<T>,
    ) -> Self {
        Self {
            p_f,
            p_d,
            q,
            fusion,
        }
    }

    pub fn reported(&self, m: T) -> (Probability<T>, Probability<T>) {
        (
            bsc_flip(at_least_one(self.p_f, m), self.q),
            bsc_flip(at_least_one(self.p_d, m), self.q),
        )
    }

    pub fn metrics(&self, m: T) -> Result<SensingMetrics<T>> {
        let (pf, pd) = self.reported(m);
        fusion_metrics(pf, pd, &self.fusion)
    }

    pub fn ter(&self, m: T) -> Result<T> {
        Ok(self.metrics(m)?.ter)
    }

    /// `dTER/dM = W_f·g(P'_f)·dP'_f/dM − W_m·g(P'_d)·dP'_d/dM` with
    /// `g(p) = k·C(N,k)·p^{k−1}(1−p)^{N−k}`, the derivative of the binomial
    /// survival function `1 − B(k−1; N, p)` in `p`.
    pub fn derivative(&self, m: T) -> T {
        let (pf, pd) = self.reported(m);
        let n = u64::from(self.fusion.nodes_n);
        let k = u64::from(self.fusion.rule_k);
        let nn = T::from_u64(n).expect("u64 fits");
        let g = |p: Probability<T>| nn * binom_pmf(k - 1, n - 1, p);
        let q = self.q.get();
        self.fusion.cost_fa * g(pf) * reported_slope(self.p_f.get(), m, q)
            - self.fusion.cost_miss * g(pd) * reported_slope(self.p_d.get(), m, q)
    }
}

/// `dTER/dM` at the node's antenna count.
pub fn d_risk_dm<T: Real>(
    channel: &MgChannel<T>,
    cfg: &DetectorConfig<T>,
    node: &NodeConfig<T>,
    fusion: &FusionConfig<T>,
) -> Result<T> {
    let risk = AntennaRisk::new(channel, cfg, node.feedback_q, fusion)?;
    Ok(risk.derivative(T::from_u32(node.antennas_m).expect("u32 fits")))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimalM<T> {
    /// Grid argmin over `1..=m_max`, ties to the smaller `M`.
    pub m_star: u32,
    pub ter: T,
    /// Continuous minimizer: the root where `dTER/dM` turns from negative to
    /// non-negative, located by bisection.
    pub root: Option<T>,
    /// `dTER/dM` keeps one sign on `[1, m_max]`.
    pub monotone: bool,
    /// TER at `M = 1..=m_max`.
    pub curve: Vec<T>,
}

impl<T: Real> OptimalM<T> {
    /// The grid argmin lies within one antenna of the continuous root.
    pub fn root_agrees(&self) -> bool {
        self.root
            .is_some_and(|r| (r - T::from_u32(self.m_star).expect("u32 fits")).abs() <= T::one())
    }
}

/// Antenna count minimizing TER.
pub fn optimal_m<T: Real>(
    channel: &MgChannel<T>,
    cfg: &DetectorConfig<T>,
    q: Probability<T>,
    fusion: &FusionConfig<T>,
    m_max: u32,
) -> Result<OptimalM<T>> {
    optimal_m_from(&AntennaRisk::new(channel, cfg, q, fusion)?, m_max)
}

pub fn optimal_m_from<T: Real>(risk: &AntennaRisk<T>, m_max: u32) -> Result<OptimalM<T>> {
    if m_max == 0 {
        return Err(Error::domain("m_max must be at least 1"));
    }
    let mt = |m: u32| T::from_u32(m).expect("u32 fits");
    let curve = (1..=m_max)
        .map(|m| risk.ter(mt(m)))
        .collect::<Result<Vec<T>>>()?;
    let mut best = 0;
    for (i, &t) in curve.iter().enumerate().skip(1) {
        if better(t, curve[best]) {
            best = i;
        }
    }
    let slopes: Vec<T> = (1..=m_max).map(|m| risk.derivative(mt(m))).collect();
    let monotone = slopes.iter().all(|&d| d < T::zero()) || slopes.iter().all(|&d| d >= T::zero());
    let mut root = None;
    if let Some(i) = slopes
        .windows(2)
        .position(|w| w[0] < T::zero() && w[1] >= T::zero())
    {
        let (mut lo, mut hi) = (mt(i as u32 + 1), mt(i as u32 + 2));
        for _ in 0..200 {
            let mid = (lo + hi) * T::lit(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if risk.derivative(mid) < T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        root = Some((lo + hi) * T::lit(0.5));
    }
    Ok(OptimalM {
        m_star: best as u32 + 1,
        ter: curve[best],
        root,
        monotone,
        curve,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FusionRule {
    Fixed(u32),
    Or,
    And,
    Optimal,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TerPoint<T> {
    pub lambda_n: T,
    pub ter: T,
    pub k_used: u32,
    pub metrics: SensingMetrics<T>,
}

/// TER over a threshold grid for one fusion rule. `fusion.rule_k` is ignored
/// in favour of `rule`. Rows come back in grid order.
pub fn ter_sweep<T: Real>(
    channel: &MgChannel<T>,
    u: T,
    lambda_grid: &[T],
    node: &NodeConfig<T>,
    fusion: &FusionConfig<T>,
    rule: FusionRule,
) -> Result<Vec<TerPoint<T>>> {
    if lambda_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    lambda_grid
        .par_iter()
        .map(|&lambda_n| {
            let cfg = DetectorConfig::new(u, lambda_n)?;
            let (pf, pd) = report_chain(channel, &cfg, node)?;
            let k = match rule {
                FusionRule::Fixed(k) => k,
                FusionRule::Or => 1,
                FusionRule::And => fusion.nodes_n,
                FusionRule::Optimal => {
                    optimal_k_exhaustive(fusion.nodes_n, pf, pd, fusion.cost_miss, fusion.cost_fa)?
                        .0
                }
            };
            let metrics = fusion_metrics(pf, pd, &fusion.with_k(k)?)?;
            Ok(TerPoint {
                lambda_n,
                ter: metrics.ter,
                k_used: k,
                metrics,
            })
        })
        .collect()
}
