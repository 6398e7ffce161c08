use rand::Rng;
use serde::{Deserialize, Serialize};

use super::marginal::log_marginal;
use super::partition::{canonicalize, Partition};
use super::vtable::{compute_v_table, VTable};
use crate::data::{MfmConfig, TrialDataset};
use crate::error::Result;
use crate::rng::RngStream;
use crate::stats::{binomial_log_pmf, sample_beta, sample_categorical};

/// Response probability of each occupied cluster, indexed by canonical label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub p: Vec<f64>,
}

/// Sampler state: a canonical partition and one parameter per cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct MfmState {
    pub partition: Partition,
    pub params: ClusterParams,
}

/// Post burn-in partitions of one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionDraws {
    pub partitions: Vec<Partition>,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub stream_id: u64,
}

impl PartitionDraws {
    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    pub fn k_values(&self) -> impl Iterator<Item = usize> + '_ {
        self.partitions.iter().map(Partition::k)
    }
}

/// Draws every cluster rate from its conjugate posterior,
/// Beta(α + Σ r, β + Σ (n − r)) over the cluster's cohorts.
pub fn update_cluster_params<R: Rng + ?Sized>(
    partition: &Partition,
    dataset: &TrialDataset,
    rng: &mut R,
    alpha: f64,
    beta: f64,
) -> ClusterParams {
    let mut succ = vec![0u64; partition.k()];
    let mut fail = vec![0u64; partition.k()];
    for (c, &l) in dataset.cohorts().iter().zip(partition.labels()) {
        succ[l] += c.r;
        fail[l] += c.n - c.r;
    }
    let p = succ
        .iter()
        .zip(&fail)
        .map(|(&s, &f)| sample_beta(rng, alpha + s as f64, beta + f as f64))
        .collect();
    ClusterParams { p }
}

/// One Gibbs sweep over the cluster labels, cohorts in input order.
///
/// Cohort i is removed from its cluster (an emptied cluster and its rate are
/// dropped), then rejoins existing cluster c with weight
/// (|c| + γ) · Binomial(rᵢ; nᵢ, P_c) or opens a new cluster with weight
/// V_N(t+1)/V_N(t) · γ · m(rᵢ), t being the number of other clusters. A new
/// cluster's rate is drawn from Beta(α + rᵢ, β + nᵢ − rᵢ). Labels are kept
/// canonical after every move.
#[allow(clippy::too_many_arguments)]
pub fn update_assignments<R: Rng + ?Sized>(
    state: &mut MfmState,
    dataset: &TrialDataset,
    vtable: &VTable,
    rng: &mut R,
    gamma: f64,
    alpha: f64,
    beta: f64,
) -> Result<()> {
    let cohorts = dataset.cohorts();
    let log_m: Vec<f64> = cohorts
        .iter()
        .map(|c| log_marginal(c.r, c.n, alpha, beta))
        .collect::<Result<_>>()?;
    sweep(state, dataset, vtable, rng, gamma, alpha, beta, &log_m)
}

#[allow(clippy::too_many_arguments)]
fn sweep<R: Rng + ?Sized>(
    state: &mut MfmState,
    dataset: &TrialDataset,
    vtable: &VTable,
    rng: &mut R,
    gamma: f64,
    alpha: f64,
    beta: f64,
    log_m: &[f64],
) -> Result<()> {
    let cohorts = dataset.cohorts();
    let mut labels = state.partition.labels().to_vec();
    let mut sizes = state.partition.sizes();
    let params = &mut state.params.p;
    debug_assert_eq!(sizes.len(), params.len());
    let ln_gamma_conc = gamma.ln();
    let mut log_w = Vec::with_capacity(sizes.len() + 1);

    for i in 0..labels.len() {
        let old = labels[i];
        sizes[old] -= 1;
        if sizes[old] == 0 {
            sizes.remove(old);
            params.remove(old);
            for l in labels.iter_mut() {
                if *l > old {
                    *l -= 1;
                }
            }
        }
        let t = sizes.len();
        let c = &cohorts[i];

        let choice = if t == 0 {
            0
        } else {
            log_w.clear();
            log_w.extend(
                sizes
                    .iter()
                    .zip(params.iter())
                    .map(|(&s, &p)| (s as f64 + gamma).ln() + binomial_log_pmf(c.r, c.n, p)),
            );
            log_w.push(vtable.log_new_cluster_ratio(t) + ln_gamma_conc + log_m[i]);
            sample_categorical(rng, &log_w)?
        };

        if choice == t {
            sizes.push(1);
            params.push(sample_beta(rng, alpha + c.r as f64, beta + (c.n - c.r) as f64));
        } else {
            sizes[choice] += 1;
        }
        labels[i] = choice;

        let (relabeled, old_of_new) = canonicalize(&labels);
        if relabeled != labels {
            *params = old_of_new.iter().map(|&o| params[o]).collect();
            sizes = old_of_new.iter().map(|&o| sizes[o]).collect();
            labels = relabeled;
        }
    }

    state.partition = Partition::from_labels(&labels);
    debug_assert_eq!(state.partition.k(), params.len());
    Ok(())
}

/// Runs the collapsed MFM sampler and keeps the post burn-in partitions.
///
/// The chain starts from `init_clusters` labels assigned uniformly at random;
/// each iteration refreshes the cluster rates, then sweeps the labels.
pub fn run_mfm(dataset: &TrialDataset, config: &MfmConfig, rng: &mut RngStream) -> Result<PartitionDraws> {
    config.validate()?;
    let n = dataset.len();
    let vtable = compute_v_table(n, config.gamma, config.lambda);
    let log_m: Vec<f64> = dataset
        .cohorts()
        .iter()
        .map(|c| log_marginal(c.r, c.n, config.alpha, config.beta))
        .collect::<Result<_>>()?;

    let init: Vec<usize> = (0..n)
        .map(|_| rng.random_range(0..config.init_clusters))
        .collect();
    let partition = Partition::from_labels(&init);
    let params = update_cluster_params(&partition, dataset, rng, config.alpha, config.beta);
    let mut state = MfmState { partition, params };

    let mut partitions = Vec::with_capacity(config.iterations - config.burn_in);
    for iter in 0..config.iterations {
        state.params = update_cluster_params(&state.partition, dataset, rng, config.alpha, config.beta);
        sweep(
            &mut state,
            dataset,
            &vtable,
            rng,
            config.gamma,
            config.alpha,
            config.beta,
            &log_m,
        )?;
        if iter >= config.burn_in {
            partitions.push(state.partition.clone());
        }
    }

    Ok(PartitionDraws {
        partitions,
        iterations: config.iterations,
        burn_in: config.burn_in,
        seed: rng.seed(),
        stream_id: rng.stream_id(),
    })
}
