//! Exact SNR densities of the tabulated fading families, used to check the
//! MG fits.

use super::presets::{CompositeSpec, Family};
use super::MgChannel;
use crate::error::{Error, Result};
use crate::quadrature::gauss_hermite;
use crate::scalar::Real;
use crate::specfun::ln_gamma;

const NODES: usize = 64;
const COARSE_NODES: usize = 32;
const NODE_AGREEMENT: f64 = 1e-6;

/// Exact density for one [`CompositeSpec`].
///
/// Shadowing is lognormal in power with spread `ζ` dB, i.e. `ln Ω` is normal
/// with `σ = ζ·ln10/10` and mean `ln γ₀ − σ²/2`, so `E[Ω] = γ₀`. Shadowed
/// families are averaged with 64-point Gauss–Hermite, checked against the
/// 32-point rule.
#[derive(Clone, Debug)]
pub struct CompositeOracle<T> {
    spec: CompositeSpec<T>,
    mu: T,
    sigma: T,
    fine: (Vec<T>, Vec<T>),
    coarse: (Vec<T>, Vec<T>),
}

impl<T: Real> CompositeOracle<T> {
    pub fn new(spec: &CompositeSpec<T>) -> Result<Self> {
        let spec = CompositeSpec::new(spec.family, spec.m, spec.zeta_shadow, spec.gamma0)?;
        let sigma = spec
            .zeta_shadow
            .map_or(T::zero(), |z| z * T::LN_10() / T::lit(10.0));
        let mu = spec.gamma0.ln() - sigma * sigma / T::lit(2.0);
        let (fine, coarse) = if spec.family.uses_zeta() && spec.family != Family::Lognormal {
            (gauss_hermite(NODES)?, gauss_hermite(COARSE_NODES)?)
        } else {
            Default::default()
        };
        Ok(Self {
            spec,
            mu,
            sigma,
            fine,
            coarse,
        })
    }

    pub fn spec(&self) -> &CompositeSpec<T> {
        &self.spec
    }

    pub fn pdf(&self, x: T) -> Result<T> {
        if x.is_nan() || x < T::zero() {
            return Err(Error::domain(format!(
                "pdf argument must be non-negative, got {x}"
            )));
        }
        let g0 = self.spec.gamma0;
        match self.spec.family {
            Family::Rayleigh => Ok(gamma_pdf(T::one(), g0, x)),
            Family::Nakagami => {
                let m = self.spec.m.expect("validated");
                Ok(gamma_pdf(m, g0 / m, x))
            }
            Family::Weibull => {
                let c = self.spec.m.expect("validated") / T::lit(2.0);
                let s = g0 / ln_gamma(T::one() + T::one() / c).exp();
                if x == T::zero() {
                    return Ok(if c < T::one() {
                        T::infinity()
                    } else if c == T::one() {
                        T::one() / s
                    } else {
                        T::zero()
                    });
                }
                let z = x / s;
                Ok(c / s * z.powf(c - T::one()) * (-z.powf(c)).exp())
            }
            Family::Lognormal => {
                if x == T::zero() {
                    return Ok(T::zero());
                }
                let d = (x.ln() - self.mu) / self.sigma;
                Ok((-(d * d) / T::lit(2.0)).exp() / (x * self.sigma * (T::TAU()).sqrt()))
            }
            Family::RayleighLognormal => self.shadowed(x, T::one()),
            Family::NakagamiLognormal => self.shadowed(x, self.spec.m.expect("validated")),
        }
    }

    fn shadowed(&self, x: T, m: T) -> Result<T> {
        let average = |(nodes, weights): &(Vec<T>, Vec<T>)| -> T {
            let s: T = nodes
                .iter()
                .zip(weights)
                .map(|(&t, &w)| {
                    let omega = (self.mu + T::SQRT_2() * self.sigma * t).exp();
                    w * gamma_pdf(m, omega / m, x)
                })
                .sum();
            s / T::PI().sqrt()
        };
        let fine = average(&self.fine);
        let coarse = average(&self.coarse);
        let diff = (fine - coarse).abs();
        if diff.is_nan() || diff > T::lit(NODE_AGREEMENT) * fine.abs().max(T::lit(1e-300)) {
            return Err(Error::Quadrature {
                tolerance: NODE_AGREEMENT,
                estimate: diff.as_f64(),
            });
        }
        Ok(fine)
    }
}

fn gamma_pdf<T: Real>(shape: T, scale: T, x: T) -> T {
    if x == T::zero() {
        return if shape < T::one() {
            T::infinity()
        } else if shape == T::one() {
            T::one() / scale
        } else {
            T::zero()
        };
    }
    ((shape - T::one()) * x.ln() - x / scale - ln_gamma(shape) - shape * scale.ln()).exp()
}

/// Exact density of `spec` at `x`.
pub fn composite_pdf_oracle<T: Real>(spec: &CompositeSpec<T>, x: T) -> Result<T> {
    CompositeOracle::new(spec)?.pdf(x)
}

/// Default error grid: `n` cell midpoints covering `[0, 10·γ₀]`.
pub fn mse_grid<T: Real>(gamma0: T, n: usize) -> Vec<T> {
    let h = T::lit(10.0) * gamma0 / T::from_usize_lossy(n);
    (0..n)
        .map(|i| (T::from_usize_lossy(i) + T::lit(0.5)) * h)
        .collect()
}

/// Mean squared density error of `channel` against the exact density of
/// `spec` on the default 2000-point grid.
pub fn fit_mse<T: Real>(channel: &MgChannel<T>, spec: &CompositeSpec<T>) -> Result<T> {
    fit_mse_on(channel, spec, &mse_grid(spec.gamma0, 2000))
}

pub fn fit_mse_on<T: Real>(
    channel: &MgChannel<T>,
    spec: &CompositeSpec<T>,
    grid: &[T],
) -> Result<T> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if (channel.gamma0() - spec.gamma0).abs() > T::lit(1e-12) * spec.gamma0 {
        return Err(Error::domain(format!(
            "channel average SNR {} differs from spec {}",
            channel.gamma0(),
            spec.gamma0
        )));
    }
    let oracle = CompositeOracle::new(spec)?;
    let mut total = T::zero();
    for &x in grid {
        let d = channel.pdf(x)? - oracle.pdf(x)?;
        if !d.is_finite() {
            return Err(Error::domain(format!(
                "density difference is not finite at x = {x}"
            )));
        }
        total = total + d * d;
    }
    Ok(total / T::from_usize_lossy(grid.len()))
}
