//! Energy detection and cooperative spectrum sensing over mixture-gamma (MG)
//! fading channels.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix it to `f64`, which is what the CLI and the Monte-Carlo
//! engine use.

pub mod channel;
pub mod cooperative;
pub mod detector;
pub mod error;
pub mod montecarlo;
pub mod quadrature;
pub mod scalar;
pub mod specfun;

pub use channel::{CompositeSpec, Family, MgChannel, MgComponent, MgSampler};
pub use cooperative::{FusionConfig, FusionRule, NodeConfig, SensingMetrics};
pub use detector::{DetectorConfig, SeriesResult};
pub use error::{Error, Result};
pub use montecarlo::{Hypothesis, McConfig, McEstimate, McMode};
pub use scalar::Real;
pub use specfun::{Probability, Settings};

pub type Probability64 = Probability<f64>;
pub type MgChannel64 = MgChannel<f64>;
pub type CompositeSpec64 = CompositeSpec<f64>;
pub type DetectorConfig64 = DetectorConfig<f64>;
pub type NodeConfig64 = NodeConfig<f64>;
pub type FusionConfig64 = FusionConfig<f64>;
pub type SensingMetrics64 = SensingMetrics<f64>;
