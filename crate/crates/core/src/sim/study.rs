use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{aab, amse};
use super::scenario::{generate_replicate, Scenario};
use crate::error::{Error, Result};
use crate::pipeline::{fit_method, Method, MethodSettings};
use crate::rng::RngStream;
use crate::stats::compensated_sum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub scenario: Scenario,
    pub replicates: usize,
    pub methods: Vec<Method>,
    pub base_seed: u64,
    pub settings: MethodSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub replicate: usize,
    /// Posterior-mean response rate per cohort, for each method.
    pub means: BTreeMap<Method, Vec<f64>>,
    /// Number of clusters in the least-squares partition (MFM-BD only).
    pub k_hat: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodMetrics {
    pub method: Method,
    pub aab: f64,
    pub amse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    pub scenario: u8,
    pub n: u64,
    pub replicates: usize,
    pub base_seed: u64,
    pub metrics: Vec<MethodMetrics>,
    pub k_hat_mean: Option<f64>,
    pub k_hat_sd: Option<f64>,
    pub results: Vec<ReplicateResult>,
}

impl StudySummary {
    pub fn metrics_for(&self, method: Method) -> Option<&MethodMetrics> {
        self.metrics.iter().find(|m| m.method == method)
    }
}

fn run_replicate(config: &StudyConfig, replicate: usize) -> Result<ReplicateResult> {
    let mut stream = RngStream::new(config.base_seed, replicate as u64);
    let data = generate_replicate(&config.scenario, &mut stream);
    let mut means = BTreeMap::new();
    let mut k_hat = None;
    for &method in &config.methods {
        let mut method_rng = stream.fork(method as u64);
        let fit = fit_method(method, &data, &config.settings, &mut method_rng)?;
        if let Some(mfm) = &fit.mfm_bd {
            k_hat = Some(mfm.partition.k());
        }
        means.insert(method, fit.estimates.iter().map(|e| e.mean).collect());
    }
    Ok(ReplicateResult {
        replicate,
        means,
        k_hat,
    })
}

/// Runs `replicates` independent datasets through every requested method.
/// Replicate r draws everything from `RngStream::new(base_seed, r)`, so the
/// summary does not depend on thread scheduling.
pub fn run_study(config: &StudyConfig) -> Result<StudySummary> {
    if config.replicates == 0 {
        return Err(Error::Config("replicates must be ≥ 1".into()));
    }
    let mut methods = config.methods.clone();
    methods.sort();
    methods.dedup();
    let config = StudyConfig {
        methods,
        ..config.clone()
    };

    let results: Vec<ReplicateResult> = (0..config.replicates)
        .into_par_iter()
        .map(|r| run_replicate(&config, r))
        .collect::<Result<_>>()?;

    let truth = &config.scenario.rates;
    let metrics = config
        .methods
        .iter()
        .map(|&method| {
            let est: Vec<Vec<f64>> = results.iter().map(|r| r.means[&method].clone()).collect();
            Ok(MethodMetrics {
                method,
                aab: aab(&est, truth)?,
                amse: amse(&est, truth)?,
            })
        })
        .collect::<Result<_>>()?;

    let ks: Vec<f64> = results.iter().filter_map(|r| r.k_hat.map(|k| k as f64)).collect();
    let (k_hat_mean, k_hat_sd) = if ks.is_empty() {
        (None, None)
    } else {
        let mean = compensated_sum(ks.iter().copied()) / ks.len() as f64;
        let sd = if ks.len() > 1 {
            (compensated_sum(ks.iter().map(|k| (k - mean).powi(2))) / (ks.len() - 1) as f64).sqrt()
        } else {
            0.0
        };
        (Some(mean), Some(sd))
    };

    Ok(StudySummary {
        scenario: config.scenario.id,
        n: config.scenario.n,
        replicates: config.replicates,
        base_seed: config.base_seed,
        metrics,
        k_hat_mean,
        k_hat_sd,
        results,
    })
}
