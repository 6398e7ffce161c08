//! Acceptance suite. Prints one PASS/FAIL line per criterion, then fails if any
//! gating criterion failed. Run with `--nocapture` to see the report.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::HashMap;
use std::process::Command;
use std::time::Instant;

use common::quadrature::{hierarchical_means, independent_mean, logit};
use common::vseries;
use mfmbd_core::bhm::{run_bhm, summarize};
use mfmbd_core::exnex::{run_exnex, summarize_exnex};
use mfmbd_core::mfm::{compute_v_table, log_marginal};
use mfmbd_core::pipeline::{run_berry, run_exnex_estimates};
use mfmbd_core::probe::probe_consistency;
use mfmbd_core::{
    exact_partition_posterior, run_mfm, run_mfm_bd, run_study, BhmConfig, CohortData, CohortEstimate,
    ExnexConfig, Method, MethodSettings, MfmConfig, RngStream, Scenario, StudyConfig, StudySummary,
    TrialDataset,
};

/// Base seed shared by the simulation-based criteria.
const SEED: u64 = 1;

/// Published Vemurafenib posterior means (%) in input order: ATC, ECD-LCH, CCA, CRC-V,
/// CRC-VC, NSCLC.
const PUBLISHED_MFM_BD: [f64; 6] = [31.8, 41.6, 12.6, 6.6, 6.5, 41.2];
const PUBLISHED_BERRY: [f64; 6] = [26.7, 38.3, 16.2, 7.5, 8.3, 38.6];
const PUBLISHED_EXNEX: [f64; 6] = [27.5, 40.7, 15.4, 5.9, 5.8, 40.5];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let sets: [&[(u64, u64)]; 4] = [
        &[(10, 2), (10, 7)],
        &[(20, 4), (20, 5), (20, 14)],
        &[(15, 3), (15, 4), (15, 9), (15, 10)],
        &[(12, 1), (12, 3), (12, 6), (12, 8), (12, 11)],
    ];
    let mut tvs = Vec::new();
    for (i, rows) in sets.iter().enumerate() {
        let data = TrialDataset::from_counts(
            rows.iter()
                .enumerate()
                .map(|(j, &(n, r))| (format!("C{j}"), n, r)),
        )
        .unwrap();
        let exact = exact_partition_posterior(&data, 1.0, 1.0, 1.0, 1.0).unwrap();
        let config = MfmConfig {
            iterations: 52_000,
            burn_in: 2000,
            ..MfmConfig::default()
        };
        let draws = run_mfm(&data, &config, &mut RngStream::new(SEED, i as u64)).unwrap();
        let mut freq: HashMap<&[usize], f64> = HashMap::new();
        for p in &draws.partitions {
            *freq.entry(p.labels()).or_default() += 1.0 / draws.len() as f64;
        }
        let tv: f64 = 0.5
            * exact
                .iter()
                .map(|e| (e.probability - freq.get(e.partition.labels()).copied().unwrap_or(0.0)).abs())
                .sum::<f64>();
        tvs.push(tv);
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = tvs.iter().all(|&tv| tv < 0.02) && secs <= 120.0;
    let shown: Vec<String> = tvs.iter().map(|tv| format!("{tv:.4}")).collect();
    Outcome::new(
        pass,
        format!(
            "TV for N=2..5: [{}] (< 0.02), {secs:.1}s (≤ 120s)",
            shown.join(", ")
        ),
    )
}

fn analytic_identities() -> Outcome {
    let mut worst_marginal: f64 = 0.0;
    for n in 0..=100u64 {
        for r in 0..=n {
            let m = log_marginal(r, n, 1.0, 1.0).unwrap().exp();
            worst_marginal = worst_marginal.max((m - 1.0 / (n + 1) as f64).abs());
        }
    }
    let v11 = (compute_v_table(1, 1.0, 1.0).log_v(1).exp() - 1.0).abs();
    let mut worst_v: f64 = 0.0;
    for n in 1..=30 {
        let table = compute_v_table(n, 1.0, 1.0);
        for t in 0..=n + 1 {
            worst_v = worst_v.max((table.log_v(t) - vseries::log_v(n, t, 1, 1)).abs());
        }
    }
    let pass = worst_marginal < 1e-12 && v11 < 1e-12 && worst_v < 1e-10;
    Outcome::new(
        pass,
        format!(
            "max |m − 1/(n+1)| = {worst_marginal:.1e}, |V_1(1) − 1| = {v11:.1e}, max rel V error (N ≤ 30) = {worst_v:.1e}"
        ),
    )
}

fn study(scenario: u8, n: u64, methods: &[Method]) -> StudySummary {
    run_study(&StudyConfig {
        scenario: Scenario::preset(scenario, n).unwrap(),
        replicates: 200,
        methods: methods.to_vec(),
        base_seed: SEED,
        settings: MethodSettings::default(),
    })
    .unwrap()
}

fn cluster_counts(cache: &mut HashMap<(u8, u64), StudySummary>) -> Outcome {
    let start = Instant::now();
    let targets = [
        (1u8, 20u64, 1.00, 1.15),
        (2, 20, 2.00, 2.35),
        (4, 30, 2.70, 3.15),
        (5, 30, 1.00, 1.10),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (sc, n, lo, hi) in targets {
        let s = cache
            .entry((sc, n))
            .or_insert_with(|| study(sc, n, &[Method::MfmBd, Method::Berry]));
        let k = s.k_hat_mean.unwrap();
        pass &= (lo..=hi).contains(&k);
        parts.push(format!("s{sc} n{n}: {k:.3} ∈ [{lo:.2}, {hi:.2}]"));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs <= 1800.0;
    Outcome::new(pass, format!("{}; {secs:.0}s", parts.join("; ")))
}

fn bias_ordering(cache: &mut HashMap<(u8, u64), StudySummary>) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (sc, n) in [(2u8, 20u64), (2, 30), (3, 20), (3, 30)] {
        let s = cache
            .entry((sc, n))
            .or_insert_with(|| study(sc, n, &[Method::MfmBd, Method::Berry]));
        let mfm = s.metrics_for(Method::MfmBd).unwrap().aab;
        let berry = s.metrics_for(Method::Berry).unwrap().aab;
        pass &= mfm < berry;
        parts.push(format!("s{sc} n{n}: {mfm:.4} < {berry:.4}"));
    }
    let s2 = cache[&(2, 30)].metrics_for(Method::MfmBd).unwrap().aab;
    let close = (s2 - 0.0056).abs() <= 0.005;
    pass &= close;
    Outcome::new(
        pass,
        format!(
            "AAB MFM-BD < Berry: {}; s2 n30 MFM-BD AAB {s2:.4} vs 0.0056 ± 0.005",
            parts.join("; ")
        ),
    )
}

fn pct(est: &[CohortEstimate]) -> Vec<f64> {
    est.iter().map(|e| 100.0 * e.mean).collect()
}

fn within(got: &[f64], reference: &[f64], tol: f64) -> (bool, String) {
    let cells: Vec<String> = got
        .iter()
        .zip(reference)
        .map(|(g, p)| {
            let flag = if (g - p).abs() <= tol { "" } else { "!" };
            format!("{g:.1}/{p:.1}{flag}")
        })
        .collect();
    (
        got.iter().zip(reference).all(|(g, p)| (g - p).abs() <= tol),
        cells.join(" "),
    )
}

fn spread(xs: &[f64]) -> f64 {
    xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - xs.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn real_data() -> Outcome {
    let start = Instant::now();
    let data = TrialDataset::vemurafenib();
    let s = MethodSettings::default();
    let fit = run_mfm_bd(&data, &s.mfm, &s.step_two, s.pt_policy, &mut RngStream::new(0, 0)).unwrap();
    let berry = run_berry(&data, &s.berry, s.pt_policy, &mut RngStream::new(0, 1)).unwrap();
    let secs = start.elapsed().as_secs_f64();

    let partition_ok = fit.partition.labels() == [0, 0, 1, 1, 1, 0];
    let mfm = pct(&fit.estimates);
    let brm = pct(&berry);
    let (berry_ok, berry_cells) = within(&brm, &PUBLISHED_BERRY, 3.0);
    let (mfm_ok, mfm_cells) = within(&mfm, &PUBLISHED_MFM_BD, 5.0);

    let blocks = fit.partition.blocks();
    let pick = |v: &[f64], b: &[usize]| b.iter().map(|&i| v[i]).collect::<Vec<_>>();
    let mut contrast_ok = blocks.len() == 2;
    if contrast_ok {
        for b in &blocks {
            contrast_ok &= spread(&pick(&mfm, b)) <= spread(&pick(&brm, b));
        }
        let gap = |v: &[f64]| {
            let (a, b) = (pick(v, &blocks[0]), pick(v, &blocks[1]));
            let (hi, lo) = if a.iter().sum::<f64>() > b.iter().sum::<f64>() {
                (a, b)
            } else {
                (b, a)
            };
            hi.iter().cloned().fold(f64::INFINITY, f64::min)
                - lo.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        };
        contrast_ok &= gap(&mfm) >= gap(&brm);
    }
    let pass = partition_ok && berry_ok && mfm_ok && contrast_ok && secs <= 60.0;
    Outcome::new(
        pass,
        format!(
            "partition {} [{}]; Berry ±3pp [{}] [{}]; MFM-BD ±5pp [{}] [{}]; shrinkage contrast [{}]; {secs:.1}s",
            fit.partition,
            ok(partition_ok),
            berry_cells,
            ok(berry_ok),
            mfm_cells,
            ok(mfm_ok),
            ok(contrast_ok)
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

fn sampler_cross_checks() -> Outcome {
    let long = BhmConfig {
        iterations: 100_000,
        burn_in: 5000,
        ..BhmConfig::default()
    };
    let single = [CohortData::new("A", 7, 2)];
    let draws = run_bhm(&single, &[0.2], &long, &mut RngStream::new(SEED, 60)).unwrap();
    let bhm = summarize(&draws, &single, &[0.2]).unwrap()[0].mean;
    let oracle = hierarchical_means(&[(2, 7)], &[logit(0.2)], 0.0, 2.0, 1.0)[0];
    let single_ok = (bhm - oracle).abs() <= 0.01;

    let cohorts = vec![
        CohortData::new("A", 12, 2),
        CohortData::new("B", 15, 6),
        CohortData::new("C", 10, 7),
    ];
    let ex1 = ExnexConfig {
        ex_mean: Some(0.0),
        iterations: 100_000,
        burn_in: 5000,
        ..ExnexConfig::default()
    }
    .with_pi(1.0);
    let d = run_exnex(&cohorts, &ex1, &mut RngStream::new(SEED, 61)).unwrap();
    let ex: Vec<f64> = summarize_exnex(&d, &cohorts)
        .unwrap()
        .iter()
        .map(|e| e.mean)
        .collect();
    let p_t = vec![0.5; 3];
    let d = run_bhm(&cohorts, &p_t, &long, &mut RngStream::new(SEED, 62)).unwrap();
    let b: Vec<f64> = summarize(&d, &cohorts, &p_t)
        .unwrap()
        .iter()
        .map(|e| e.mean)
        .collect();
    let pi1 = ex.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);

    let nex_means = [-1.0, 0.0, 0.5];
    let nex_sds = [2.0, 1.0, 1.5];
    let ex0 = ExnexConfig {
        nex_means: Some(nex_means.to_vec()),
        nex_vars: Some(nex_sds.iter().map(|s| s * s).collect()),
        iterations: 60_000,
        burn_in: 5000,
        ..ExnexConfig::default()
    }
    .with_pi(0.0);
    let d = run_exnex(&cohorts, &ex0, &mut RngStream::new(SEED, 63)).unwrap();
    let ex: Vec<f64> = summarize_exnex(&d, &cohorts)
        .unwrap()
        .iter()
        .map(|e| e.mean)
        .collect();
    let pi0 = cohorts
        .iter()
        .enumerate()
        .map(|(i, c)| (ex[i] - independent_mean(c.r, c.n, nex_means[i], nex_sds[i])).abs())
        .fold(0.0, f64::max);

    let pass = single_ok && pi1 <= 0.015 && pi0 <= 0.01;
    Outcome::new(
        pass,
        format!(
            "single-cohort BHM {bhm:.4} vs quadrature {oracle:.4} (±0.01); EXNEX π=1 vs BHM max diff {pi1:.4} (±0.015); EXNEX π=0 vs quadrature max diff {pi0:.4} (±0.01)"
        ),
    )
}

fn consistency_probe() -> Outcome {
    let start = Instant::now();
    let schedule = [4, 10, 20, 40];
    let rows = probe_consistency(&[0.2, 0.6], &schedule, 30, &MfmConfig::default(), SEED).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let probs: Vec<f64> = rows.iter().map(|r| r.prob_true_k).collect();
    let last = *probs.last().unwrap();
    let monotone = probs.windows(2).all(|w| w[1] >= w[0] - 0.05);
    let pass = last >= 0.9 && monotone && secs <= 300.0;
    let shown: Vec<String> = rows
        .iter()
        .map(|r| format!("N={}: {:.3}", r.cohorts, r.prob_true_k))
        .collect();
    Outcome::new(
        pass,
        format!(
            "P(k=2|data) [{}]; ≥ 0.9 at N=40 [{}]; nondecreasing within 0.05 [{}]; {secs:.1}s",
            shown.join(", "),
            ok(last >= 0.9),
            ok(monotone)
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, threads: &str| {
        let out = dir.path().join(sub);
        let status = Command::new(env!("CARGO_BIN_EXE_mfmbd"))
            .env("MFMBD_THREADS", threads)
            .args(["fit", "--method", "mfm-bd", "--seed", "7", "--out"])
            .arg(&out)
            .output()
            .unwrap();
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
        std::fs::read(out.join("report.json")).unwrap()
    };
    let a = run("a", "1");
    let b = run("b", "1");
    let c = run("c", "3");
    Outcome::new(
        a == b && a == c,
        format!(
            "`fit --seed 7` twice: {} bytes, identical {}; with 3 threads identical {}",
            a.len(),
            a == b,
            a == c
        ),
    )
}

fn exnex_real_data() -> Outcome {
    let data = TrialDataset::vemurafenib();
    let est = run_exnex_estimates(&data, &ExnexConfig::default(), &mut RngStream::new(0, 2)).unwrap();
    let (pass, cells) = within(&pct(&est), &PUBLISHED_EXNEX, 4.0);
    Outcome::new(pass, format!("EXNEX ±4pp [{cells}]"))
}

#[test]
fn acceptance() {
    let mut cache = HashMap::new();
    let criteria: Vec<(&str, Outcome)> = vec![
        ("1 oracle equivalence", oracle_equivalence()),
        ("2 analytic identities", analytic_identities()),
        ("3 K̂ reproduction", cluster_counts(&mut cache)),
        ("4 AAB ordering", bias_ordering(&mut cache)),
        ("5 real-data reproduction", real_data()),
        ("6 sampler cross-checks", sampler_cross_checks()),
        ("7 consistency probe", consistency_probe()),
        ("8 determinism", determinism()),
    ];
    let advisory = exnex_real_data();

    println!();
    for (name, o) in &criteria {
        println!("[{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!(
        "[{}] advisory, EXNEX real data: {}",
        if advisory.pass { "PASS" } else { "FAIL" },
        advisory.detail
    );

    let failed: Vec<&str> = criteria
        .iter()
        .filter(|(_, o)| !o.pass)
        .map(|(n, _)| *n)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
