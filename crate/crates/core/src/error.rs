use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} did not converge within {iterations} iterations")]
    Convergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("quadrature did not reach tolerance {tolerance:e} (estimated error {estimate:e})")]
    Quadrature { tolerance: f64, estimate: f64 },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("preset `{preset}` requires parameter `{parameter}`")]
    MissingParameter {
        preset: &'static str,
        parameter: &'static str,
    },

    #[error("shape parameter {0} is not an integer")]
    NonIntegerShape(f64),

    #[error("evaluation grid is empty")]
    EmptyGrid,

    #[error("invalid trial count {0}")]
    InvalidTrials(u64),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of an iterative method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Convergence { .. } | Error::Quadrature { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
