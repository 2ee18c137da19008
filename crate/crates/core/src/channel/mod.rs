//! Mixture-gamma (MG) SNR distributions.
//!
//! Each component is a proper gamma density with shape `β` and scale `γ₀/ζ`,
//! weighted by `α`:
//!
//! `f(x) = Σ_k α_k · (ζ_k/γ₀)^{β_k} x^{β_k−1} e^{−ζ_k x/γ₀} / Γ(β_k)`
//!
//! so `Σ α_k = 1` is exactly the condition for unit mass. The compact form
//! sometimes quoted for MG fits, `Σ (α_k/γ₀)(x/γ₀)^{β_k−1} e^{−ζ_k x/γ₀}`,
//! folds `ζ_k^{β_k}/Γ(β_k)` into `α_k`; the weights in [`presets`] are the
//! normalized ones. In particular the Nakagami-m weight `m^m/Γ(m)` becomes a
//! single component of weight 1.

mod composite;
pub mod presets;

pub use composite::{composite_pdf_oracle, fit_mse, fit_mse_on, mse_grid, CompositeOracle};
pub use presets::{preset, preset_by_name, CompositeSpec, Family, TableRow, PRESET_TABLE};

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::specfun::{ln_gamma, regularized_gamma_pair, Probability};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MgComponent<T> {
    /// Mixing weight.
    pub alpha: T,
    /// Gamma shape.
    pub beta: T,
    /// Rate relative to `1/γ₀`; the component scale is `γ₀/ζ`.
    pub zeta: T,
}

impl<T: Real> MgComponent<T> {
    pub fn new(alpha: T, beta: T, zeta: T) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("zeta", zeta)] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::domain(format!(
                    "MG component {name} must be positive, got {v}"
                )));
            }
        }
        Ok(Self { alpha, beta, zeta })
    }

    /// Rate of this component at average SNR `gamma0`.
    #[inline]
    pub fn rate(&self, gamma0: T) -> T {
        self.zeta / gamma0
    }

    fn ln_pdf(&self, gamma0: T, x: T) -> T {
        let rate = self.rate(gamma0);
        self.alpha.ln() + self.beta * rate.ln() - ln_gamma(self.beta)
            + (self.beta - T::one()) * x.ln()
            - rate * x
    }
}

/// A mixture-gamma channel at a given average SNR (linear scale).
#[derive(Clone, Debug, PartialEq)]
pub struct MgChannel<T> {
    components: Vec<MgComponent<T>>,
    gamma0: T,
    label: String,
}

impl<T: Real> MgChannel<T> {
    /// Weights must sum to one within `1e-6`; they are then rescaled to sum
    /// to one exactly.
    pub fn new(
        components: Vec<MgComponent<T>>,
        gamma0: T,
        label: impl Into<String>,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::domain("MG channel needs at least one component"));
        }
        if !(gamma0.is_finite() && gamma0 > T::zero()) {
            return Err(Error::domain(format!(
                "average SNR must be positive, got {gamma0}"
            )));
        }
        let total: T = components.iter().map(|c| c.alpha).sum();
        if (total - T::one()).abs() > T::lit(1e-6) {
            return Err(Error::domain(format!(
                "MG weights sum to {total}, expected 1"
            )));
        }
        let components = components
            .into_iter()
            .map(|c| MgComponent {
                alpha: c.alpha / total,
                ..c
            })
            .collect();
        Ok(Self {
            components,
            gamma0,
            label: label.into(),
        })
    }

    pub fn components(&self) -> &[MgComponent<T>] {
        &self.components
    }

    pub fn gamma0(&self) -> T {
        self.gamma0
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Same mixture at another average SNR.
    pub fn with_gamma0(&self, gamma0: T) -> Result<Self> {
        Self::new(self.components.clone(), gamma0, self.label.clone())
    }

    pub fn pdf(&self, x: T) -> Result<T> {
        if x.is_nan() || x < T::zero() {
            return Err(Error::domain(format!(
                "pdf argument must be non-negative, got {x}"
            )));
        }
        if x == T::zero() {
            let mut total = T::zero();
            for c in &self.components {
                if c.beta < T::one() {
                    return Ok(T::infinity());
                }
                if c.beta == T::one() {
                    total = total + c.alpha * c.rate(self.gamma0);
                }
            }
            return Ok(total);
        }
        Ok(self
            .components
            .iter()
            .map(|c| c.ln_pdf(self.gamma0, x).exp())
            .sum())
    }

    pub fn cdf(&self, x: T) -> Result<Probability<T>> {
        if x.is_nan() || x < T::zero() {
            return Err(Error::domain(format!(
                "cdf argument must be non-negative, got {x}"
            )));
        }
        if x.is_infinite() {
            return Ok(Probability::one());
        }
        let mut total = T::zero();
        for c in &self.components {
            let (lower, _) = regularized_gamma_pair(c.beta, c.rate(self.gamma0) * x)?;
            total = total + c.alpha * lower;
        }
        Probability::new(total)
    }

    /// `γ₀ Σ α_k β_k / ζ_k`.
    pub fn mean_snr(&self) -> T {
        self.gamma0
            * self
                .components
                .iter()
                .map(|c| c.alpha * c.beta / c.zeta)
                .sum()
    }

    /// One SNR draw: pick component `k` with probability `α_k`, then a gamma
    /// variate with shape `β_k` and scale `γ₀/ζ_k`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        T::lit(self.sampler().sample(rng))
    }

    /// Precomputed sampler for repeated draws.
    pub fn sampler(&self) -> MgSampler {
        let mut cumulative = Vec::with_capacity(self.components.len());
        let mut acc = 0.0;
        let mut dists = Vec::with_capacity(self.components.len());
        for c in &self.components {
            acc += c.alpha.as_f64();
            cumulative.push(acc);
            let scale = (self.gamma0 / c.zeta).as_f64();
            dists.push(Gamma::new(c.beta.as_f64(), scale).expect("validated gamma parameters"));
        }
        MgSampler { cumulative, dists }
    }
}

/// Draws SNR values in `f64` from an [`MgChannel`].
#[derive(Clone, Debug)]
pub struct MgSampler {
    cumulative: Vec<f64>,
    dists: Vec<Gamma<f64>>,
}

impl Distribution<f64> for MgSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = *self.cumulative.last().expect("non-empty mixture");
        let u: f64 = rng.random::<f64>() * total;
        let k = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.cumulative.len() - 1);
        self.dists[k].sample(rng)
    }
}
