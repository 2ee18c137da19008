//! Fitted MG coefficients for common fading channels.

use std::fmt;
use std::str::FromStr;

use super::{MgChannel, MgComponent};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Rayleigh,
    Nakagami,
    Weibull,
    Lognormal,
    RayleighLognormal,
    NakagamiLognormal,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Rayleigh,
        Family::Nakagami,
        Family::Weibull,
        Family::Lognormal,
        Family::RayleighLognormal,
        Family::NakagamiLognormal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Rayleigh => "rayleigh",
            Family::Nakagami => "nakagami",
            Family::Weibull => "weibull",
            Family::Lognormal => "lognormal",
            Family::RayleighLognormal => "rayleigh_lognormal",
            Family::NakagamiLognormal => "nakagami_lognormal",
        }
    }

    /// Whether the family takes a Nakagami/Weibull shape `m`.
    pub fn uses_m(self) -> bool {
        matches!(
            self,
            Family::Nakagami | Family::Weibull | Family::NakagamiLognormal
        )
    }

    /// Whether the family has lognormal shadowing.
    pub fn uses_zeta(self) -> bool {
        matches!(
            self,
            Family::Lognormal | Family::RayleighLognormal | Family::NakagamiLognormal
        )
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Family::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// A fading family with its parameters, as used by the presets and the
/// exact-density oracles.
///
/// `zeta_shadow` is the lognormal shadowing spread in dB (standard deviation
/// of `10·log10` of the shadowed power).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompositeSpec<T> {
    pub family: Family,
    pub m: Option<T>,
    pub zeta_shadow: Option<T>,
    pub gamma0: T,
}

impl<T: Real> CompositeSpec<T> {
    pub fn new(family: Family, m: Option<T>, zeta_shadow: Option<T>, gamma0: T) -> Result<Self> {
        let family_name = family.name();
        match (family.uses_m(), m) {
            (true, None) => {
                return Err(Error::MissingParameter {
                    preset: family_name,
                    parameter: "m",
                })
            }
            (false, Some(_)) => {
                return Err(Error::domain(format!("{family_name} takes no m parameter")))
            }
            (true, Some(v)) if !(v.is_finite() && v > T::zero()) => {
                return Err(Error::domain(format!("m must be positive, got {v}")))
            }
            _ => {}
        }
        match (family.uses_zeta(), zeta_shadow) {
            (true, None) => {
                return Err(Error::MissingParameter {
                    preset: family_name,
                    parameter: "zeta",
                })
            }
            (false, Some(_)) => {
                return Err(Error::domain(format!(
                    "{family_name} takes no zeta parameter"
                )))
            }
            (true, Some(v)) if !(v.is_finite() && v > T::zero()) => {
                return Err(Error::domain(format!("zeta must be positive, got {v}")))
            }
            _ => {}
        }
        if !(gamma0.is_finite() && gamma0 > T::zero()) {
            return Err(Error::domain(format!(
                "average SNR must be positive, got {gamma0}"
            )));
        }
        Ok(Self {
            family,
            m,
            zeta_shadow,
            gamma0,
        })
    }

    pub fn label(&self) -> String {
        let mut params = Vec::new();
        if let Some(m) = self.m {
            params.push(format!("m={m}"));
        }
        if let Some(z) = self.zeta_shadow {
            params.push(format!("zeta={z}"));
        }
        if params.is_empty() {
            self.family.name().to_string()
        } else {
            format!("{}({})", self.family.name(), params.join(","))
        }
    }
}

/// One row of the coefficient table. `fitted` holds `(α, β, 1/ζ)` per
/// component; it is `None` for Nakagami-m, which is exact for any `m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableRow {
    pub family: Family,
    pub m: Option<f64>,
    pub zeta: Option<f64>,
    pub fitted: Option<[(f64, f64, f64); 2]>,
    /// Published fit error, where one exists.
    pub mse: Option<f64>,
}

pub const PRESET_TABLE: [TableRow; 9] = [
    TableRow {
        family: Family::Lognormal,
        m: None,
        zeta: Some(1.0),
        fitted: Some([
            (0.8795306, 21.47391625, 0.04634621),
            (0.1204694, 19.29669267, 0.06526572),
        ]),
        mse: Some(2.18e-4),
    },
    TableRow {
        family: Family::Weibull,
        m: Some(4.0),
        zeta: None,
        fitted: Some([
            (0.4163066, 2.547627, 0.276866),
            (0.5836934, 6.410809, 0.1887993),
        ]),
        mse: Some(8.14e-5),
    },
    TableRow {
        family: Family::Rayleigh,
        m: None,
        zeta: None,
        fitted: Some([
            (0.2803494, 0.9124631, 0.4795083),
            (0.7196506, 1.3046339, 0.9339172),
        ]),
        mse: None,
    },
    TableRow {
        family: Family::Nakagami,
        m: None,
        zeta: None,
        fitted: None,
        mse: None,
    },
    TableRow {
        family: Family::RayleighLognormal,
        m: None,
        zeta: Some(1.0),
        fitted: Some([
            (0.2889985, 0.9667361, 3.908869),
            (0.7110015, 0.972492, 1.62796),
        ]),
        mse: Some(1.18e-6),
    },
    TableRow {
        family: Family::RayleighLognormal,
        m: None,
        zeta: Some(1.5),
        fitted: Some([
            (0.7229848, 0.9223047, 0.8351385),
            (0.2770152, 0.8499458, 3.0324419),
        ]),
        mse: None,
    },
    TableRow {
        family: Family::RayleighLognormal,
        m: None,
        zeta: Some(0.5),
        fitted: Some([
            (0.3491298, 0.9117919, 0.6304104),
            (0.6508702, 1.225578, 1.010205),
        ]),
        mse: Some(1.43e-6),
    },
    TableRow {
        family: Family::NakagamiLognormal,
        m: Some(2.0),
        zeta: Some(0.5),
        fitted: Some([
            (0.6569638, 1.9707105, 0.4273802),
            (0.3430362, 2.5034565, 0.5267421),
        ]),
        mse: Some(1.55e-6),
    },
    TableRow {
        family: Family::NakagamiLognormal,
        m: Some(4.0),
        zeta: Some(0.5),
        fitted: Some([
            (0.7775037, 4.0356456, 0.2247047),
            (0.2224963, 5.2938705, 0.2556295),
        ]),
        mse: Some(3.76e-6),
    },
];

fn same(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() <= 1e-9 * y.abs().max(1.0),
        _ => false,
    }
}

/// Table row for a spec, if there is one. Nakagami-m matches for any `m`.
pub fn table_row<T: Real>(spec: &CompositeSpec<T>) -> Option<&'static TableRow> {
    let m = spec.m.map(Real::as_f64);
    let zeta = spec.zeta_shadow.map(Real::as_f64);
    PRESET_TABLE.iter().find(|row| {
        row.family == spec.family
            && (row.family == Family::Nakagami || (same(row.m, m) && same(row.zeta, zeta)))
    })
}

/// MG channel for a tabulated family at the spec's average SNR.
pub fn preset<T: Real>(spec: &CompositeSpec<T>) -> Result<MgChannel<T>> {
    let row = table_row(spec).ok_or_else(|| Error::UnknownPreset(spec.label()))?;
    let components = match row.fitted {
        Some(coeffs) => coeffs
            .iter()
            .map(|&(a, b, inv_z)| MgComponent::new(T::lit(a), T::lit(b), T::one() / T::lit(inv_z)))
            .collect::<Result<Vec<_>>>()?,
        None => {
            let m = spec.m.expect("validated nakagami spec");
            vec![MgComponent::new(T::one(), m, m)?]
        }
    };
    MgChannel::new(components, spec.gamma0, spec.label())
}

/// [`preset`] from a family name such as `"rayleigh_lognormal"`.
pub fn preset_by_name<T: Real>(
    name: &str,
    m: Option<T>,
    zeta_shadow: Option<T>,
    gamma0: T,
) -> Result<MgChannel<T>> {
    let family: Family = name.parse()?;
    preset(&CompositeSpec::new(family, m, zeta_shadow, gamma0)?)
}
