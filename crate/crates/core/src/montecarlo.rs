//! Seeded Monte-Carlo simulation of single nodes and whole cooperative
//! networks, in `f64`.
//!
//! Trials are cut into fixed-size blocks. Block `b` draws from
//! [`rng_stream`]`(seed, b)` and only integer success counts are summed, so a
//! run gives the same counts serially or in parallel.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::channel::{MgChannel, MgSampler};
use crate::cooperative::{FusionConfig, NodeConfig};
use crate::detector::{prob_detect_awgn, prob_false_alarm, DetectorConfig};
use crate::error::{Error, Result};
use crate::specfun::Probability;

/// Trials per random stream.
pub const BLOCK_TRIALS: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum McMode {
    /// Draw the SNR, then a Bernoulli decision with the conditional
    /// detection probability.
    SemiAnalytic,
    /// Synthesize the energy statistic from `2u` Gaussian samples.
    FullStatistic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hypothesis {
    /// Primary user absent.
    H0,
    /// Primary user present.
    H1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub mode: McMode,
    pub parallel: bool,
}

impl McConfig {
    pub fn new(trials: u64, seed: u64, mode: McMode) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidTrials(trials));
        }
        Ok(Self {
            trials,
            seed,
            mode,
            parallel: true,
        })
    }

    pub fn serial(self) -> Self {
        Self {
            parallel: false,
            ..self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub estimate: Probability<f64>,
    pub std_error: f64,
    pub trials: u64,
    pub successes: u64,
}

impl McEstimate {
    fn from_counts(successes: u64, trials: u64) -> Self {
        let p = successes as f64 / trials as f64;
        Self {
            estimate: Probability::new(p).expect("ratio of counts"),
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
            successes,
        }
    }

    /// `(estimate − analytic) / std_error`, or 0 when both the difference
    /// and the standard error vanish.
    pub fn z_score(&self, analytic: f64) -> f64 {
        let d = self.estimate.get() - analytic;
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d == 0.0 {
            0.0
        } else {
            // no hits observed; fall back to the analytic binomial spread
            let se = (analytic * (1.0 - analytic) / self.trials as f64).sqrt();
            if se > 0.0 {
                d / se
            } else {
                f64::INFINITY
            }
        }
    }
}

/// Independent, reproducible stream `stream_id` under `seed`.
pub fn rng_stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

// Everything one branch decision needs, prepared once per run.
struct BranchModel<'a> {
    cfg: DetectorConfig<f64>,
    sampler: MgSampler,
    hypothesis: Hypothesis,
    mode: McMode,
    p_f: f64,
    dof: usize,
    channel: &'a MgChannel<f64>,
}

impl<'a> BranchModel<'a> {
    fn new(
        channel: &'a MgChannel<f64>,
        cfg: &DetectorConfig<f64>,
        hypothesis: Hypothesis,
        mode: McMode,
    ) -> Result<Self> {
        let two_u = 2.0 * cfg.u;
        let dof = if mode == McMode::FullStatistic {
            if two_u.fract() != 0.0 {
                return Err(Error::domain(format!(
                    "full-statistic simulation needs 2u to be an integer, got u = {}",
                    cfg.u
                )));
            }
            two_u as usize
        } else {
            0
        };
        Ok(Self {
            cfg: *cfg,
            sampler: channel.sampler(),
            hypothesis,
            mode,
            p_f: prob_false_alarm(cfg)?.get(),
            dof,
            channel,
        })
    }

    fn decide<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<bool> {
        let gamma = match self.hypothesis {
            Hypothesis::H0 => 0.0,
            Hypothesis::H1 => self.sampler.sample(rng),
        };
        match self.mode {
            McMode::SemiAnalytic => {
                let p = match self.hypothesis {
                    Hypothesis::H0 => self.p_f,
                    Hypothesis::H1 => prob_detect_awgn(&self.cfg, gamma)?.get(),
                };
                Ok(rng.random::<f64>() < p)
            }
            McMode::FullStatistic => {
                let z: f64 = StandardNormal.sample(rng);
                let shifted = z + (2.0 * gamma).sqrt();
                let mut energy = shifted * shifted;
                for _ in 1..self.dof {
                    let z: f64 = StandardNormal.sample(rng);
                    energy += z * z;
                }
                Ok(energy > self.cfg.lambda_n)
            }
        }
    }

    /// Square-law selection: the node decides "present" if any branch does.
    fn node_decides<R: Rng + ?Sized>(&self, rng: &mut R, antennas: u32) -> Result<bool> {
        let mut any = false;
        for _ in 0..antennas {
            // every branch is drawn so the stream layout does not depend on
            // earlier outcomes
            any |= self.decide(rng)?;
        }
        Ok(any)
    }
}

fn run_blocks<F>(mc: &McConfig, trial: F) -> Result<McEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> Result<bool> + Sync,
{
    let blocks = mc.trials.div_ceil(BLOCK_TRIALS);
    let block = |b: u64| -> Result<u64> {
        let mut rng = rng_stream(mc.seed, b);
        let n = BLOCK_TRIALS.min(mc.trials - b * BLOCK_TRIALS);
        let mut hits = 0;
        for _ in 0..n {
            hits += trial(&mut rng)? as u64;
        }
        Ok(hits)
    };
    let successes: u64 = if mc.parallel {
        (0..blocks)
            .into_par_iter()
            .map(block)
            .sum::<Result<u64>>()?
    } else {
        (0..blocks).map(block).sum::<Result<u64>>()?
    };
    Ok(McEstimate::from_counts(successes, mc.trials))
}

/// Empirical probability that one SLS node declares "present" (before the
/// reporting channel): `P_f,SLS` under H0, `P_d,SLS` under H1.
pub fn simulate_node(
    channel: &MgChannel<f64>,
    cfg: &DetectorConfig<f64>,
    node: &NodeConfig<f64>,
    hypothesis: Hypothesis,
    mc: &McConfig,
) -> Result<McEstimate> {
    McConfig::new(mc.trials, mc.seed, mc.mode)?;
    let model = BranchModel::new(channel, cfg, hypothesis, mc.mode)?;
    run_blocks(mc, |rng| model.node_decides(rng, node.antennas_m))
}

/// Empirical fusion-center decision rate: `Q_f` under H0, `Q_d` under H1.
/// Each of the `N` nodes decides, its bit is flipped with probability `q`,
/// and the center declares "present" on at least `k` ones.
pub fn simulate_css(
    channel: &MgChannel<f64>,
    cfg: &DetectorConfig<f64>,
    node: &NodeConfig<f64>,
    fusion: &FusionConfig<f64>,
    hypothesis: Hypothesis,
    mc: &McConfig,
) -> Result<McEstimate> {
    McConfig::new(mc.trials, mc.seed, mc.mode)?;
    let model = BranchModel::new(channel, cfg, hypothesis, mc.mode)?;
    let q = node.feedback_q.get();
    run_blocks(mc, |rng| {
        let mut votes = 0;
        for _ in 0..fusion.nodes_n {
            let bit = model.node_decides(rng, node.antennas_m)?;
            let flipped = rng.random::<f64>() < q;
            votes += (bit != flipped) as u32;
        }
        Ok(votes >= fusion.rule_k)
    })
}

impl std::fmt::Debug for BranchModel<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BranchModel")
            .field("channel", &self.channel.label())
            .field("hypothesis", &self.hypothesis)
            .field("mode", &self.mode)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::preset_by_name;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| rng_stream(9, 3).random()).collect();
        let mut r1 = rng_stream(9, 3);
        let mut r2 = rng_stream(9, 3);
        let mut r3 = rng_stream(9, 4);
        let x: Vec<u64> = (0..4).map(|_| r1.random()).collect();
        let y: Vec<u64> = (0..4).map(|_| r2.random()).collect();
        let z: Vec<u64> = (0..4).map(|_| r3.random()).collect();
        assert_eq!(x, y);
        assert_ne!(x, z);
        assert_eq!(a.len(), 4);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(
            McConfig::new(0, 1, McMode::SemiAnalytic),
            Err(Error::InvalidTrials(0))
        ));
        let ch = preset_by_name("rayleigh", None, None, 1.0).unwrap();
        let cfg = DetectorConfig::new(1.3, 2.0).unwrap();
        let node = NodeConfig::new(1, 0.0).unwrap();
        let mc = McConfig::new(10, 1, McMode::FullStatistic).unwrap();
        assert!(simulate_node(&ch, &cfg, &node, Hypothesis::H1, &mc).is_err());
        let cfg = DetectorConfig::new(1.5, 2.0).unwrap();
        assert!(simulate_node(&ch, &cfg, &node, Hypothesis::H1, &mc).is_ok());
    }

    #[test]
    fn z_score_edge_cases() {
        let e = McEstimate::from_counts(0, 100);
        assert_eq!(e.z_score(0.0), 0.0);
        assert!((e.z_score(0.01) + 0.01 / (0.01f64 * 0.99 / 100.0).sqrt()).abs() < 1e-12);
    }
}
