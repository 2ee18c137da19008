use mgsense::channel::preset_by_name;
use mgsense::cooperative::*;
use mgsense::detector::DetectorConfig;
use mgsense::Probability;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn p(x: f64) -> Probability<f64> {
    Probability::new(x).unwrap()
}

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

fn informative_pair() -> impl Strategy<Value = (f64, f64)> {
    (0.001f64..0.999, 0.001f64..0.999)
        .prop_filter("distinct", |(a, b)| (a - b).abs() > 1e-3)
        .prop_map(|(a, b)| (a.min(b), a.max(b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn miss_and_detection_are_complements(n in 1u32..40, k_frac in 0.0f64..1.0, pf in 0.0f64..=1.0, pd in 0.0f64..=1.0) {
        let k = 1 + ((n - 1) as f64 * k_frac) as u32;
        let f = FusionConfig::new(n, k, 0.4, 0.6).unwrap();
        let m = fusion_metrics(p(pf), p(pd), &f).unwrap();
        prop_assert!((m.q_d.get() + m.q_m.get() - 1.0).abs() <= 1e-12);
        prop_assert!((bayes_risk(&f, p(pf), p(pd)).unwrap() - m.ter).abs() <= 1e-12);
    }

    #[test]
    fn risk_is_unimodal_in_k(n in 1u32..30, (pf, pd) in informative_pair(), wm in 0.01f64..10.0, wf in 0.01f64..10.0) {
        let f = FusionConfig::new(n, 1, wm, wf).unwrap();
        let r: Vec<f64> = (1..=n).map(|k| bayes_risk(&f.with_k(k).unwrap(), p(pf), p(pd)).unwrap()).collect();
        let tol = 1e-12;
        let mut rising = false;
        for w in r.windows(2) {
            if w[1] > w[0] + tol { rising = true; }
            prop_assert!(!(rising && w[1] < w[0] - tol), "not unimodal: {r:?}");
        }
    }

    #[test]
    fn cost_scaling_keeps_argmins(n in 1u32..20, (pf, pd) in informative_pair(), wm in 0.01f64..10.0, wf in 0.01f64..10.0, c in 0.01f64..100.0) {
        let a = optimal_k_exhaustive(n, p(pf), p(pd), wm, wf).unwrap().0;
        let b = optimal_k_exhaustive(n, p(pf), p(pd), c * wm, c * wf).unwrap().0;
        prop_assert_eq!(a, b);
        let k = a.min(n);
        let risk = |s: f64| AntennaRisk::from_branch(p(pf * 0.3), p(pd), p(0.01), FusionConfig::new(n, k, s * wm, s * wf).unwrap());
        prop_assert_eq!(optimal_m_from(&risk(1.0), 30).unwrap().m_star, optimal_m_from(&risk(c), 30).unwrap().m_star);
    }

    #[test]
    fn reported_derivative_matches_finite_difference(pb in 0.01f64..0.99, m in 1.0f64..30.0, q in 0.0f64..0.5) {
        let h = 1e-5;
        // reported = q + (1−2q)(1 − (1−p)^M); difference the M-dependent
        // part directly so the constant offset does not swamp the step
        let survive = |mm: f64| (1.0 - pb).powf(mm);
        let fd = (1.0 - 2.0 * q) * (survive(m - h) - survive(m + h)) / (2.0 * h);
        let d = d_reported_dm(p(pb), m, p(q)).unwrap();
        prop_assert!((d - fd).abs() <= 1e-6 * d.abs().max(1e-300) + 1e-12);
    }
}

#[test]
fn closed_form_k_within_one_of_exhaustive() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut exact = 0;
    for _ in 0..200 {
        let n = rng.random_range(1..=20);
        let a: f64 = rng.random_range(0.001..0.999);
        let b: f64 = rng.random_range(0.001..0.999);
        if (a - b).abs() < 1e-6 {
            continue;
        }
        let (pf, pd) = (a.min(b), a.max(b));
        let wm = rng.random_range(0.01..10.0);
        let wf = rng.random_range(0.01..10.0);
        let ex = optimal_k_exhaustive(n, p(pf), p(pd), wm, wf).unwrap().0;
        let cl = optimal_k_closed(n, p(pf), p(pd), wm, wf).unwrap();
        assert!(
            ex.abs_diff(cl) <= 1,
            "n={n} pf={pf} pd={pd} wm={wm} wf={wf}: {ex} vs {cl}"
        );
        exact += (ex == cl) as u32;
    }
    assert!(exact >= 190);
}

#[test]
fn risk_derivative_matches_finite_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let names = [
        "rayleigh",
        "rayleigh_lognormal",
        "nakagami_lognormal",
        "weibull",
    ];
    let mut checked = 0;
    while checked < 100 {
        let name = names[rng.random_range(0..names.len())];
        let ch = match name {
            "rayleigh" => preset_by_name("rayleigh", None, None, db(rng.random_range(-5.0..15.0))),
            "rayleigh_lognormal" => {
                preset_by_name(name, None, Some(0.5), db(rng.random_range(-5.0..15.0)))
            }
            "nakagami_lognormal" => {
                preset_by_name(name, Some(4.0), Some(0.5), db(rng.random_range(-5.0..15.0)))
            }
            _ => preset_by_name(name, Some(4.0), None, db(rng.random_range(-5.0..15.0))),
        }
        .unwrap();
        let n = rng.random_range(1..=15);
        let k = rng.random_range(1..=n);
        let fusion =
            FusionConfig::new(n, k, rng.random_range(0.1..1.0), rng.random_range(0.1..1.0))
                .unwrap();
        let cfg = DetectorConfig::new(rng.random_range(1..=6) as f64, rng.random_range(1.0..30.0))
            .unwrap();
        let q = p(rng.random_range(0.0..0.1));
        let risk = AntennaRisk::new(&ch, &cfg, q, &fusion).unwrap();
        let m: f64 = rng.random_range(1.0..20.0);
        let h = 1e-5;
        let fd = (risk.ter(m + h).unwrap() - risk.ter(m - h).unwrap()) / (2.0 * h);
        let d = risk.derivative(m);
        // with h = 1e-5 the difference quotient carries ~1e-11·TER of rounding,
        // so it can only certify 1e-6 relative accuracy on slopes above 1e-4·TER
        if d.abs() < 1e-4 * risk.ter(m).unwrap() {
            continue;
        }
        assert!(
            (d - fd).abs() <= 1e-6 * d.abs(),
            "{name} n={n} k={k} m={m}: {d} vs {fd}"
        );
        checked += 1;
    }
    let ch = preset_by_name("rayleigh", None, None, 3.0).unwrap();
    let node = NodeConfig::new(2, 0.5).unwrap();
    let cfg = DetectorConfig::new(2.0, 8.0).unwrap();
    assert_eq!(
        d_risk_dm(
            &ch,
            &cfg,
            &node,
            &FusionConfig::new(10, 3, 0.3, 0.7).unwrap()
        )
        .unwrap(),
        0.0
    );
}

#[test]
fn perfect_feedback_slope_sign_matches_grid() {
    let ch = preset_by_name("nakagami_lognormal", Some(4.0), Some(0.5), db(5.0)).unwrap();
    let cfg = DetectorConfig::new(1.0, 8.0).unwrap();
    let fusion = FusionConfig::new(10, 3, 0.3, 0.7).unwrap();
    let risk = AntennaRisk::new(&ch, &cfg, p(0.0), &fusion).unwrap();
    for m in 1..30u32 {
        let diff = risk.ter((m + 1) as f64).unwrap() - risk.ter(m as f64).unwrap();
        let (d0, d1) = (risk.derivative(m as f64), risk.derivative((m + 1) as f64));
        if d0 < 0.0 && d1 < 0.0 {
            assert!(diff < 0.0);
        }
        if d0 > 0.0 && d1 > 0.0 {
            assert!(diff > 0.0);
        }
    }
}

#[test]
fn report_chain_limits() {
    let ch = preset_by_name("rayleigh", None, None, db(5.0)).unwrap();
    let cfg = DetectorConfig::new(5.0, 8.0).unwrap();
    let (pf, pd) = report_chain(&ch, &cfg, &NodeConfig::new(1, 0.0).unwrap()).unwrap();
    assert_eq!(
        pf.get(),
        mgsense::detector::prob_false_alarm(&cfg).unwrap().get()
    );
    assert_eq!(
        pd.get(),
        mgsense::detector::prob_detect_mg_series(&ch, &cfg, 1e-12)
            .unwrap()
            .value
            .get()
    );
    let (pf, pd) = report_chain(&ch, &cfg, &NodeConfig::new(3, 0.5).unwrap()).unwrap();
    assert_eq!((pf.get(), pd.get()), (0.5, 0.5));
}

#[test]
fn optimal_rule_dominates() {
    let ch = preset_by_name("nakagami_lognormal", Some(4.0), Some(0.5), db(10.0)).unwrap();
    let node = NodeConfig::new(1, 0.01).unwrap();
    let fusion = FusionConfig::new(10, 3, 0.3, 0.7).unwrap();
    let grid: Vec<f64> = (0..80).map(|i| i as f64 * 0.5).collect();
    let sweep = |rule| ter_sweep(&ch, 2.0, &grid, &node, &fusion, rule).unwrap();
    let (or, and, opt) = (
        sweep(FusionRule::Or),
        sweep(FusionRule::And),
        sweep(FusionRule::Optimal),
    );
    for i in 0..grid.len() {
        assert_eq!(or[i].lambda_n, grid[i]);
        assert!(
            opt[i].ter <= or[i].ter * (1.0 + 1e-12) && opt[i].ter <= and[i].ter * (1.0 + 1e-12)
        );
        assert_eq!((or[i].k_used, and[i].k_used), (1, 10));
    }
    // λ → 0: every node reports 1 − q
    let low = ter_sweep(&ch, 2.0, &[0.0], &node, &fusion, FusionRule::Fixed(3)).unwrap()[0];
    assert!((low.metrics.p_f.get() - 0.99).abs() < 1e-15);
    assert!((low.ter - 0.7 * low.metrics.q_f.get() - 0.3 * low.metrics.q_m.get()).abs() < 1e-15);
    assert!(low.ter > 0.69);
}

#[test]
fn optimal_m_with_imperfect_feedback_has_interior_minimum() {
    let ch = preset_by_name("nakagami_lognormal", Some(4.0), Some(0.5), db(5.0)).unwrap();
    let cfg = DetectorConfig::new(1.0, 8.0).unwrap();
    let fusion = FusionConfig::new(10, 3, 0.3, 0.7).unwrap();
    let r = optimal_m(&ch, &cfg, p(0.01), &fusion, 30).unwrap();
    assert!(r.m_star > 1 && r.m_star < 30, "{r:?}");
    assert!(!r.monotone && r.root_agrees());
    assert!(r.curve[r.m_star as usize..].iter().all(|&t| t >= r.ter));
    assert!(optimal_m(&ch, &cfg, p(0.01), &fusion, 0).is_err());
}

#[test]
fn monotone_flag_on_decreasing_range() {
    // a weak detector keeps gaining from extra antennas over a short range
    let r = AntennaRisk::from_branch(
        p(1e-4),
        p(0.05),
        p(0.0),
        FusionConfig::new(10, 3, 0.3, 0.7).unwrap(),
    );
    let o = optimal_m_from(&r, 5).unwrap();
    assert!(o.monotone && o.root.is_none());
    assert_eq!(o.m_star, 5);
    assert!(o.curve.windows(2).all(|w| w[1] <= w[0]));
}
