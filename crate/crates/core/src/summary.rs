//! Posterior summaries of sampled partitions: co-clustering probabilities,
//! the least-squares (Dahl) draw and the number of clusters.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mfm::Partition;

/// Square, symmetric co-membership matrix with unit diagonal, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipMatrix {
    n: usize,
    values: Vec<f64>,
}

impl MembershipMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.n).map(<[f64]>::to_vec).collect()
    }
}

/// B(i, j) = 1 when cohorts i and j share a cluster.
pub fn membership(partition: &Partition) -> MembershipMatrix {
    let labels = partition.labels();
    let n = labels.len();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                values[i * n + j] = 1.0;
            }
        }
    }
    MembershipMatrix { n, values }
}

/// Element-wise mean of the draws' membership matrices.
pub fn mean_membership(draws: &[Partition]) -> Result<MembershipMatrix> {
    let first = draws.first().ok_or(Error::EmptyDraws)?;
    let n = first.len();
    let mut counts = vec![0u64; n * n];
    for p in draws {
        if p.len() != n {
            return Err(Error::Dimension(format!(
                "partition of {} items among draws of {n}",
                p.len()
            )));
        }
        let labels = p.labels();
        for i in 0..n {
            for j in 0..n {
                if labels[i] == labels[j] {
                    counts[i * n + j] += 1;
                }
            }
        }
    }
    let l = draws.len() as f64;
    Ok(MembershipMatrix {
        n,
        values: counts.iter().map(|&c| c as f64 / l).collect(),
    })
}

/// Result of the least-squares partition selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DahlEstimate {
    pub partition: Partition,
    /// Zero-based position of the selected draw.
    pub index: usize,
    /// Σᵢⱼ (B(i, j) − B̄(i, j))² of the selected draw.
    pub distance: f64,
    pub co_clustering: MembershipMatrix,
}

/// Picks the draw whose membership matrix is closest, in squared Euclidean
/// distance, to the mean membership matrix. The earliest draw wins ties.
pub fn dahl_select(draws: &[Partition]) -> Result<DahlEstimate> {
    let mean = mean_membership(draws)?;
    let n = mean.n;
    let mut best = (0usize, f64::INFINITY);
    for (idx, p) in draws.iter().enumerate() {
        let labels = p.labels();
        let mut dist = 0.0;
        for i in 0..n {
            for j in 0..n {
                let b = if labels[i] == labels[j] { 1.0 } else { 0.0 };
                let d = b - mean.values[i * n + j];
                dist += d * d;
            }
        }
        if dist < best.1 {
            best = (idx, dist);
        }
    }
    Ok(DahlEstimate {
        partition: draws[best.0].clone(),
        index: best.0,
        distance: best.1,
        co_clustering: mean,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KHat {
    /// Number of clusters of the selected draw.
    pub point: usize,
    /// Empirical distribution of k over all retained draws.
    pub pmf: BTreeMap<usize, f64>,
}

pub fn k_hat(draws: &[Partition], selected: &Partition) -> KHat {
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for p in draws {
        *counts.entry(p.k()).or_default() += 1;
    }
    let total = draws.len().max(1) as f64;
    KHat {
        point: selected.k(),
        pmf: counts.into_iter().map(|(k, c)| (k, c as f64 / total)).collect(),
    }
}
