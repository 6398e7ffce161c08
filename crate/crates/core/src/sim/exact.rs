use serde::{Deserialize, Serialize};

use crate::data::TrialDataset;
use crate::error::{Error, Result};
use crate::mfm::{cluster_log_marginal, compute_v_table, Partition};
use crate::stats::{ln_gamma, log_sum_exp};

/// Bell(8) = 4140 partitions.
pub const MAX_EXACT_COHORTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionProbability {
    pub partition: Partition,
    pub probability: f64,
}

/// Every set partition of `n` items, as canonical restricted growth strings
/// in lexicographic order.
pub fn set_partitions(n: usize) -> Vec<Partition> {
    fn extend(prefix: &mut Vec<usize>, max_label: usize, n: usize, out: &mut Vec<Partition>) {
        if prefix.len() == n {
            out.push(Partition::from_labels(prefix));
            return;
        }
        let limit = if prefix.is_empty() { 0 } else { max_label + 1 };
        for l in 0..=limit {
            prefix.push(l);
            extend(prefix, max_label.max(l), n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        extend(&mut Vec::with_capacity(n), 0, n, &mut out);
    }
    out
}

/// Posterior over all set partitions of the cohorts under the MFM prior with
/// Beta(α, β) cluster rates:
///
///   p(C | data) ∝ V_N(|C|) · Π_c γ^(|c|) · Π_c m(c),
///
/// where γ^(|c|) is the rising factorial and m(c) the beta-binomial marginal
/// of cluster c.
pub fn exact_partition_posterior(
    dataset: &TrialDataset,
    gamma: f64,
    alpha: f64,
    beta: f64,
    lambda: f64,
) -> Result<Vec<PartitionProbability>> {
    let n = dataset.len();
    if n > MAX_EXACT_COHORTS {
        return Err(Error::TooLarge(n, MAX_EXACT_COHORTS));
    }
    for (name, v) in [
        ("gamma", gamma),
        ("alpha", alpha),
        ("beta", beta),
        ("lambda", lambda),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Config(format!("{name} must be positive, got {v}")));
        }
    }
    let vtable = compute_v_table(n, gamma, lambda);
    let ln_gamma_conc = ln_gamma(gamma);
    let partitions = set_partitions(n);
    let log_w: Vec<f64> = partitions
        .iter()
        .map(|p| {
            let mut lw = vtable.log_v(p.k());
            for block in p.blocks() {
                lw += ln_gamma(gamma + block.len() as f64) - ln_gamma_conc;
                lw += cluster_log_marginal(block.iter().map(|&i| &dataset.cohorts()[i]), alpha, beta);
            }
            lw
        })
        .collect();
    let norm = log_sum_exp(&log_w);
    Ok(partitions
        .into_iter()
        .zip(log_w)
        .map(|(partition, lw)| PartitionProbability {
            partition,
            probability: (lw - norm).exp(),
        })
        .collect())
}
