use mgsense::channel::{preset_by_name, Family, PRESET_TABLE};
use mgsense::cooperative::{
    fusion_metrics, optimal_k_closed, optimal_k_exhaustive, report_chain, sls_detect,
    sls_false_alarm, ter_sweep, AntennaRisk, FusionConfig, FusionRule, NodeConfig,
};
use mgsense::detector::{
    prob_detect_mg_quadrature, prob_detect_mg_series, prob_false_alarm, roc_sweep, DetectorConfig,
};
use mgsense::montecarlo::{simulate_css, simulate_node, Hypothesis, McConfig, McMode};
use mgsense::{MgChannel64, Probability};

use crate::output::{Cell, Table};
use crate::{ChannelArgs, Failure, McArgs, Mode, OptimalMArgs, RocArgs, TerArgs};

/// Monte-Carlo rows with |z| above this fail the run.
const Z_BREACH: f64 = 4.0;

fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn channel_at(
    name: &str,
    m: Option<f64>,
    zeta: Option<f64>,
    gamma0_db: f64,
) -> Result<MgChannel64, Failure> {
    Ok(preset_by_name(name, m, zeta, from_db(gamma0_db))?)
}

fn build_channel(a: &ChannelArgs) -> Result<MgChannel64, Failure> {
    channel_at(&a.channel, a.m, a.zeta, a.gamma0_db)
}

pub fn channels(filter: Option<&str>) -> Result<Table, Failure> {
    let family = filter.map(str::parse::<Family>).transpose()?;
    let mut t = Table::new(&[
        "family",
        "m",
        "zeta",
        "alpha_1",
        "beta_1",
        "inv_zeta_1",
        "alpha_2",
        "beta_2",
        "inv_zeta_2",
        "mse",
    ]);
    for row in PRESET_TABLE
        .iter()
        .filter(|r| family.is_none_or(|f| f == r.family))
    {
        let short = |x: Option<f64>| x.map_or(Cell::Empty, Cell::Short);
        let mut cells = vec![row.family.name().into(), short(row.m), short(row.zeta)];
        match row.fitted {
            Some(c) => {
                for (a, b, z) in c {
                    cells.extend([Cell::Short(a), Cell::Short(b), Cell::Short(z)]);
                }
            }
            None => {
                cells.extend(["m^m/Gamma(m)".into(), "m".into(), "1/m".into()]);
                cells.extend([Cell::Empty, Cell::Empty, Cell::Empty]);
            }
        }
        cells.push(short(row.mse));
        t.push(cells);
    }
    Ok(t)
}

pub fn roc(a: &RocArgs) -> Result<Table, Failure> {
    let ch = build_channel(&a.channel)?;
    let grid = a.threshold.points();
    let points = roc_sweep(&ch, a.u, &grid)?;
    let mut columns = vec!["lambda_n", "p_f", "p_d", "p_m"];
    if a.oracle {
        columns.push("p_d_quadrature");
    }
    let mut t = Table::new(&columns);
    for p in points {
        let mut row: Vec<Cell> = vec![
            p.lambda_n.into(),
            p.p_f.get().into(),
            p.p_d.get().into(),
            p.p_m.get().into(),
        ];
        if a.oracle {
            let cfg = DetectorConfig::new(a.u, p.lambda_n)?;
            row.push(prob_detect_mg_quadrature(&ch, &cfg)?.get().into());
        }
        t.push(row);
    }
    Ok(t)
}

type TerInputs = (MgChannel64, NodeConfig<f64>, FusionConfig<f64>, Vec<f64>);

fn ter_inputs(a: &TerArgs) -> Result<TerInputs, Failure> {
    let ch = build_channel(&a.channel)?;
    let node = NodeConfig::new(a.node.antennas, a.node.q)?;
    let fusion = FusionConfig::new(a.fusion.nodes, 1, a.fusion.wm, a.fusion.wf)?;
    if let Some(k) = a.k {
        fusion.with_k(k)?;
    }
    Ok((ch, node, fusion, a.threshold.points()))
}

pub fn ter(a: &TerArgs) -> Result<Table, Failure> {
    let (ch, node, fusion, grid) = ter_inputs(a)?;
    let sweep = |rule| ter_sweep(&ch, a.u, &grid, &node, &fusion, rule);
    let or = sweep(FusionRule::Or)?;
    let and = sweep(FusionRule::And)?;
    let opt = sweep(FusionRule::Optimal)?;
    let fixed = a.k.map(|k| sweep(FusionRule::Fixed(k))).transpose()?;
    let mut columns = vec!["lambda_n", "ter_or", "ter_and", "ter_opt", "k_opt"];
    if fixed.is_some() {
        columns.push("ter_k");
    }
    let mut t = Table::new(&columns);
    for i in 0..grid.len() {
        let mut row: Vec<Cell> = vec![
            grid[i].into(),
            or[i].ter.into(),
            and[i].ter.into(),
            opt[i].ter.into(),
            opt[i].k_used.into(),
        ];
        if let Some(f) = &fixed {
            row.push(f[i].ter.into());
        }
        t.push(row);
    }
    Ok(t)
}

pub fn optimal_k(a: &TerArgs) -> Result<Table, Failure> {
    let (ch, node, fusion, grid) = ter_inputs(a)?;
    let mut t = Table::new(&[
        "lambda_n",
        "p_f_rep",
        "p_d_rep",
        "k_exhaustive",
        "risk",
        "k_closed",
    ]);
    for l in grid {
        let cfg = DetectorConfig::new(a.u, l)?;
        let (pf, pd) = report_chain(&ch, &cfg, &node)?;
        let (k, risk) =
            optimal_k_exhaustive(fusion.nodes_n, pf, pd, fusion.cost_miss, fusion.cost_fa)?;
        // the closed form needs 0 < p_f < p_d < 1
        let closed =
            optimal_k_closed(fusion.nodes_n, pf, pd, fusion.cost_miss, fusion.cost_fa).ok();
        t.push(vec![
            l.into(),
            pf.get().into(),
            pd.get().into(),
            k.into(),
            risk.into(),
            closed.into(),
        ]);
    }
    Ok(t)
}

pub fn optimal_m(a: &OptimalMArgs) -> Result<Table, Failure> {
    let cfg = DetectorConfig::new(a.u, a.lambda_n)?;
    let q = Probability::new(a.q)?;
    NodeConfig::new(1, a.q)?;
    let fusion = FusionConfig::new(a.fusion.nodes, a.k, a.fusion.wm, a.fusion.wf)?;
    if a.m_max == 0 {
        return Err(Failure::Usage("--m-max must be at least 1".into()));
    }
    let channel = |db: f64| channel_at(&a.channel, a.m, a.zeta, db);
    if a.sweep_m {
        let db = a.gamma0_db.expect("clap requires --gamma0-db here");
        let risk = AntennaRisk::new(&channel(db)?, &cfg, q, &fusion)?;
        let mut t = Table::new(&["m", "ter", "d_ter_dm"]);
        for m in 1..=a.m_max {
            let mf = f64::from(m);
            t.push(vec![
                m.into(),
                risk.ter(mf)?.into(),
                risk.derivative(mf).into(),
            ]);
        }
        return Ok(t);
    }
    let snr: Vec<f64> = match (&a.sweep_snr, a.gamma0_db) {
        (Some(g), _) => g.points(),
        (None, Some(db)) => vec![db],
        (None, None) => unreachable!("clap requires one SNR option"),
    };
    let mut t = Table::new(&["gamma0_db", "m_star", "ter_at_m_star", "root", "monotone"]);
    for db in snr {
        let r = mgsense::cooperative::optimal_m(&channel(db)?, &cfg, q, &fusion, a.m_max)?;
        t.push(vec![
            db.into(),
            r.m_star.into(),
            r.ter.into(),
            r.root.into(),
            r.monotone.into(),
        ]);
    }
    Ok(t)
}

pub fn mc(a: &McArgs) -> Result<Table, Failure> {
    let ch = build_channel(&a.channel)?;
    let cfg = DetectorConfig::new(a.u, a.lambda_n)?;
    let node = NodeConfig::new(a.node.antennas, a.node.q)?;
    let mode = match a.mode {
        Mode::SemiAnalytic => McMode::SemiAnalytic,
        Mode::FullStatistic => McMode::FullStatistic,
    };
    // one seed per row so that rows are independent of each other
    let run_cfg = |offset: u64| McConfig::new(a.trials, a.seed.wrapping_add(offset), mode);

    let mut t = Table::new(&["quantity", "analytic", "empirical", "std_error", "z_score"]);
    let mut breach = false;
    let mut push = |name: &str, analytic: f64, est: mgsense::McEstimate| {
        let z = est.z_score(analytic);
        breach |= z.abs() > Z_BREACH;
        t.push(vec![
            name.into(),
            analytic.into(),
            est.estimate.get().into(),
            est.std_error.into(),
            z.into(),
        ]);
    };

    let pf = sls_false_alarm(prob_false_alarm(&cfg)?, node.antennas_m).get();
    let pd = sls_detect(
        prob_detect_mg_series(&ch, &cfg, 1e-12)?.value,
        node.antennas_m,
    )
    .get();
    push(
        "p_f_sls",
        pf,
        simulate_node(&ch, &cfg, &node, Hypothesis::H0, &run_cfg(0)?)?,
    );
    push(
        "p_d_sls",
        pd,
        simulate_node(&ch, &cfg, &node, Hypothesis::H1, &run_cfg(1)?)?,
    );
    if let Some(k) = a.k {
        let fusion = FusionConfig::new(a.nodes, k, 1.0, 1.0)?;
        let (pf_rep, pd_rep) = report_chain(&ch, &cfg, &node)?;
        let m = fusion_metrics(pf_rep, pd_rep, &fusion)?;
        push(
            "q_f",
            m.q_f.get(),
            simulate_css(&ch, &cfg, &node, &fusion, Hypothesis::H0, &run_cfg(2)?)?,
        );
        push(
            "q_d",
            m.q_d.get(),
            simulate_css(&ch, &cfg, &node, &fusion, Hypothesis::H1, &run_cfg(3)?)?,
        );
    }
    if breach {
        Err(Failure::Breach(t))
    } else {
        Ok(t)
    }
}
