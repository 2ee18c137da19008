//! Numerical integration used as the independent oracle for every closed or
//! series form: globally adaptive Gauss–Kronrod (7/15), a double-exponential
//! (exp-sinh) rule for `[0, ∞)`, and Gauss–Hermite nodes for lognormal
//! averaging.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 0.0,
            max_intervals: 4000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error_estimate: T,
    pub evaluations: usize,
}

fn gk15<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = T::lit(0.5);
    let center = (a + b) * half;
    let radius = (b - a) * half;
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = radius * T::lit(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + pair * T::lit(WG[j / 2]);
        }
    }
    (kronrod * radius, ((kronrod - gauss) * radius).abs())
}

struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Segment<T> {}
impl<T: Real> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

/// Globally adaptive Gauss–Kronrod 7/15 on a finite interval: the segment
/// with the largest `|K15 − G7|` is bisected until the summed estimate is
/// within tolerance.
pub fn gauss_kronrod<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    settings: &QuadSettings,
) -> Result<QuadResult<T>> {
    let (value, error) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut evaluations = 15;
    let mut total_value = value;
    let mut total_error = error;
    let target = |v: T| T::lit(settings.abs_tol).max(T::lit(settings.rel_tol) * v.abs());
    while total_error > target(total_value) {
        if heap.len() >= settings.max_intervals {
            return Err(Error::Quadrature {
                tolerance: settings.abs_tol,
                estimate: total_error.as_f64(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = (worst.a + worst.b) * T::lit(0.5);
        if mid <= worst.a || mid >= worst.b {
            // cannot split further in this precision; keep what we have
            heap.push(worst);
            break;
        }
        let (lv, le) = gk15(&mut f, worst.a, mid);
        let (rv, re) = gk15(&mut f, mid, worst.b);
        evaluations += 30;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
        });
        // re-sum from scratch to avoid drift from repeated add/subtract
        let mut v = CompensatedSum::new();
        let mut e = CompensatedSum::new();
        for s in heap.iter() {
            v.add(s.value);
            e.add(s.error);
        }
        total_value = v.value();
        total_error = e.value();
    }
    if !total_value.is_finite() {
        return Err(Error::Quadrature {
            tolerance: settings.abs_tol,
            estimate: f64::INFINITY,
        });
    }
    Ok(QuadResult {
        value: total_value,
        error_estimate: total_error,
        evaluations,
    })
}

/// `∫₀^∞ f` as `∫₀^c f + ∫_c^∞ f`, the tail mapped to `[0, 1)` by the
/// exponential substitution `x = c − s·ln(1 − t)`.
///
/// `c` and `s` should be of the order of the integrand's bulk and decay scale.
pub fn integrate_half_line<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    split: T,
    scale: T,
    settings: &QuadSettings,
) -> Result<QuadResult<T>> {
    let half = QuadSettings {
        abs_tol: settings.abs_tol * 0.5,
        ..*settings
    };
    let head = gauss_kronrod(&mut f, T::zero(), split, &half)?;
    let tail = gauss_kronrod(
        |t: T| {
            let one_minus = T::one() - t;
            if one_minus <= T::zero() {
                return T::zero();
            }
            let x = split - scale * one_minus.ln();
            let fx = f(x);
            if fx == T::zero() {
                T::zero()
            } else {
                fx * scale / one_minus
            }
        },
        T::zero(),
        T::one(),
        &half,
    )?;
    Ok(QuadResult {
        value: head.value + tail.value,
        error_estimate: head.error_estimate + tail.error_estimate,
        evaluations: head.evaluations + tail.evaluations,
    })
}

/// Double-exponential quadrature for `∫₀^∞ f` with `x = c·exp(π/2 · sinh t)`.
///
/// Trapezoidal sums on `t` with step halving until two successive levels
/// agree to `abs_tol`. Integrable endpoint singularities at 0 and
/// exponentially decaying tails are both handled by the transformation.
pub fn exp_sinh<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    scale: T,
    abs_tol: f64,
) -> Result<QuadResult<T>> {
    let half_pi = T::FRAC_PI_2();
    let mut eval = |t: T| -> T {
        let x = scale * (half_pi * t.sinh()).exp();
        if !x.is_finite() || x == T::zero() {
            return T::zero();
        }
        let fx = f(x);
        if fx == T::zero() {
            return T::zero();
        }
        fx * x * half_pi * t.cosh()
    };
    let t_max = T::lit(6.5);
    let mut h = T::one();
    let mut evaluations = 0;
    // level 0: all integer nodes
    let mut sum = CompensatedSum::new();
    let n0 = (t_max / h).to_i64().unwrap_or(6);
    for k in -n0..=n0 {
        sum.add(eval(T::lit(k as f64)));
        evaluations += 1;
    }
    let mut estimate = sum.value() * h;
    for level in 1..=12 {
        h = h * T::lit(0.5);
        let n = (t_max / h).to_i64().unwrap_or(0);
        let mut k = -n + 1;
        if k % 2 == 0 {
            k -= 1;
        }
        // new nodes are the odd multiples of h
        while k <= n {
            sum.add(eval(T::lit(k as f64) * h));
            evaluations += 1;
            k += 2;
        }
        let next = sum.value() * h;
        let diff = (next - estimate).abs();
        estimate = next;
        if diff <= T::lit(abs_tol) && level >= 3 {
            return Ok(QuadResult {
                value: estimate,
                error_estimate: diff,
                evaluations,
            });
        }
    }
    Err(Error::Quadrature {
        tolerance: abs_tol,
        estimate: f64::NAN,
    })
}

/// Gauss–Hermite nodes and weights for `∫ e^{-t²} g(t) dt ≈ Σ wᵢ g(tᵢ)`.
///
/// Newton iteration on the orthonormal Hermite recurrence.
pub fn gauss_hermite<T: Real>(n: usize) -> Result<(Vec<T>, Vec<T>)> {
    if n == 0 {
        return Err(Error::domain("Gauss-Hermite needs at least one node"));
    }
    let pim4 = T::lit(0.751_125_544_464_942_5); // π^(-1/4)
    let nf = T::from_usize_lossy(n);
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let m = n.div_ceil(2);
    let mut z = T::zero();
    for i in 0..m {
        z = match i {
            0 => {
                (T::lit(2.0) * nf + T::one()).sqrt()
                    - T::lit(1.855_75) * (T::lit(2.0) * nf + T::one()).powf(T::lit(-1.0 / 6.0))
            }
            1 => z - T::lit(1.14) * nf.powf(T::lit(0.426)) / z,
            2 => T::lit(1.86) * z - T::lit(0.86) * nodes[0],
            3 => T::lit(1.91) * z - T::lit(0.91) * nodes[1],
            _ => T::lit(2.0) * z - nodes[i - 2],
        };
        let mut pp = T::zero();
        let mut converged = false;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = T::zero();
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = T::from_usize_lossy(j);
                p1 = z * (T::lit(2.0) / (jf + T::one())).sqrt() * p2
                    - (jf / (jf + T::one())).sqrt() * p3;
            }
            pp = (T::lit(2.0) * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= T::epsilon() * T::lit(4.0) * z.abs().max(T::one()) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence {
                what: "Gauss-Hermite node",
                iterations: 100,
            });
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = T::lit(2.0) / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    // nodes were generated largest first
    nodes.reverse();
    weights.reverse();
    Ok((nodes, weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kronrod_weights_integrate_polynomials_exactly() {
        let s = QuadSettings::default();
        let r = gauss_kronrod(|x: f64| x.powi(22) + 3.0 * x.powi(5), -1.0, 1.0, &s).unwrap();
        assert_abs_diff_eq!(r.value, 2.0 / 23.0, epsilon = 1e-15);
        let total: f64 = WGK[..7].iter().map(|w| 2.0 * w).sum::<f64>() + WGK[7];
        assert_abs_diff_eq!(total, 2.0, epsilon = 1e-15);
        let gauss: f64 = WG[..3].iter().map(|w| 2.0 * w).sum::<f64>() + WG[3];
        assert_abs_diff_eq!(gauss, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let s = QuadSettings {
            abs_tol: 1e-11,
            ..Default::default()
        };
        let r = gauss_kronrod(|x: f64| x.powf(-0.09), 0.0, 1.0, &s).unwrap();
        assert_abs_diff_eq!(r.value, 1.0 / 0.91, epsilon = 1e-10);
    }

    #[test]
    fn half_line_and_exp_sinh_agree_on_gamma_density() {
        // gamma(0.9, 2) density integrates to one
        let shape: f64 = 0.9;
        let ln_norm = crate::specfun::ln_gamma(shape) + shape * 2f64.ln();
        let pdf = |x: f64| ((shape - 1.0) * x.ln() - x / 2.0 - ln_norm).exp();
        let s = QuadSettings {
            abs_tol: 1e-11,
            ..Default::default()
        };
        let a = integrate_half_line(pdf, 1.8, 2.0, &s).unwrap();
        let b = exp_sinh(pdf, 1.8, 1e-11).unwrap();
        assert_abs_diff_eq!(a.value, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(b.value, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn hermite_rule_moments() {
        let (t, w) = gauss_hermite::<f64>(32).unwrap();
        let pi_sqrt = std::f64::consts::PI.sqrt();
        let m0: f64 = w.iter().sum();
        let m2: f64 = t.iter().zip(&w).map(|(t, w)| w * t * t).sum();
        let m1: f64 = t.iter().zip(&w).map(|(t, w)| w * t).sum();
        assert_abs_diff_eq!(m0, pi_sqrt, epsilon = 1e-13);
        assert_abs_diff_eq!(m2, pi_sqrt / 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(m1, 0.0, epsilon = 1e-13);
        assert!(t.windows(2).all(|p| p[0] < p[1]));
        // E[e^{σZ}] = e^{σ²/2}
        let sigma = 0.7f64;
        let mgf: f64 = t
            .iter()
            .zip(&w)
            .map(|(t, w)| w * (std::f64::consts::SQRT_2 * sigma * t).exp())
            .sum::<f64>()
            / pi_sqrt;
        assert_abs_diff_eq!(mgf, (sigma * sigma / 2.0).exp(), epsilon = 1e-13);
    }

    #[test]
    fn quadrature_failure_is_reported() {
        let s = QuadSettings {
            abs_tol: 1e-14,
            rel_tol: 0.0,
            max_intervals: 4,
        };
        let err = gauss_kronrod(|x: f64| (1.0 / x).sin(), 1e-4, 1.0, &s).unwrap_err();
        assert!(err.is_numerical());
    }
}
