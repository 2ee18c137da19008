use mgsense::channel::{preset, CompositeSpec, Family, MgChannel, PRESET_TABLE};
use mgsense::quadrature::{gauss_kronrod, integrate_half_line, QuadSettings};
use mgsense::specfun::regularized_upper_gamma;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

fn all_presets(gamma0: f64) -> Vec<MgChannel<f64>> {
    PRESET_TABLE
        .iter()
        .map(|row| {
            let m = match row.family {
                Family::Nakagami => Some(2.0),
                _ => row.m,
            };
            let spec = CompositeSpec::new(row.family, m, row.zeta, gamma0).unwrap();
            preset(&spec).unwrap()
        })
        .collect()
}

fn tight() -> QuadSettings {
    QuadSettings {
        abs_tol: 1e-10,
        ..Default::default()
    }
}

#[test]
fn presets_integrate_to_one() {
    for gamma0 in [0.3, 1.0, 10.0] {
        for ch in all_presets(gamma0) {
            let mass = integrate_half_line(|x| ch.pdf(x).unwrap(), gamma0, 4.0 * gamma0, &tight())
                .unwrap()
                .value;
            assert!(
                (mass - 1.0).abs() <= 1e-6,
                "{} at {gamma0}: {mass}",
                ch.label()
            );
        }
    }
}

#[test]
fn cdf_is_integral_of_pdf() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for ch in all_presets(1.0) {
        for _ in 0..50 {
            let x: f64 = rng.random_range(0.0..6.0);
            let q = gauss_kronrod(|t| ch.pdf(t).unwrap(), 0.0, x, &tight())
                .unwrap()
                .value;
            let c = ch.cdf(x).unwrap().get();
            assert!((c - q).abs() <= 1e-8, "{} x={x}: {c} vs {q}", ch.label());
        }
    }
}

#[test]
fn rayleigh_cdf_at_one() {
    let ch = &all_presets(1.0)[2];
    assert_eq!(ch.label(), "rayleigh");
    let q = gauss_kronrod(|t| ch.pdf(t).unwrap(), 0.0, 1.0, &tight())
        .unwrap()
        .value;
    assert!((ch.cdf(1.0).unwrap().get() - q).abs() <= 1e-8);
}

#[test]
fn mean_matches_first_moment() {
    for ch in all_presets(1.0) {
        let m1 = integrate_half_line(|x| x * ch.pdf(x).unwrap(), 1.0, 4.0, &tight())
            .unwrap()
            .value;
        assert!(
            (ch.mean_snr() - m1).abs() <= 1e-8,
            "{}: {} vs {m1}",
            ch.label(),
            ch.mean_snr()
        );
    }
}

// Pearson chi-square on 100 bins over [0, 8γ₀] plus an overflow bin. Bins
// with fewer than 5 expected hits are pooled.
fn chi_square_p_value(ch: &MgChannel<f64>, draws: usize, seed: u64) -> f64 {
    let g0 = ch.gamma0();
    let bins = 100;
    let width = 8.0 * g0 / bins as f64;
    let mut counts = vec![0u64; bins + 1];
    let sampler = ch.sampler();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..draws {
        let x = sampler.sample(&mut rng);
        let b = ((x / width) as usize).min(bins);
        counts[b] += 1;
    }
    let mut edges: Vec<f64> = (0..=bins)
        .map(|i| ch.cdf(i as f64 * width).unwrap().get())
        .collect();
    edges.push(1.0);
    let n = draws as f64;
    let (mut stat, mut cells) = (0.0, 0usize);
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for b in 0..=bins {
        let expected = n * (edges[b + 1] - edges[b]);
        let observed = counts[b] as f64;
        if expected < 5.0 {
            pooled_obs += observed;
            pooled_exp += expected;
        } else {
            stat += (observed - expected).powi(2) / expected;
            cells += 1;
        }
    }
    if pooled_exp >= 5.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        cells += 1;
    }
    regularized_upper_gamma((cells - 1) as f64 / 2.0, stat / 2.0).unwrap()
}

#[test]
fn samples_follow_the_density() {
    for (i, ch) in all_presets(1.0).iter().enumerate() {
        let p = chi_square_p_value(ch, 1_000_000, 100 + i as u64);
        assert!(p > 0.001, "{}: p = {p}", ch.label());
    }
}
