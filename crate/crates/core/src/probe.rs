//! Empirical check that the posterior on the number of clusters
//! concentrates on the truth as cohorts accumulate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{CohortData, MfmConfig, TrialDataset};
use crate::error::{Error, Result};
use crate::mfm::run_mfm;
use crate::rng::RngStream;
use rand_distr::{Binomial, Distribution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub cohorts: usize,
    /// Fraction of retained draws with exactly k₀ clusters.
    pub prob_true_k: f64,
}

/// For each total cohort count in `schedule`, simulates equal-sized true
/// clusters with the given `rates` (one per cluster, so k₀ = rates.len()),
/// runs the MFM sampler and records the retained-draw frequency of k = k₀.
///
/// Schedule point j uses `RngStream::new(seed, j)`.
pub fn probe_consistency(
    rates: &[f64],
    schedule: &[usize],
    n_per_cohort: u64,
    config: &MfmConfig,
    seed: u64,
) -> Result<Vec<ProbeRow>> {
    let k0 = rates.len();
    if k0 == 0 || rates.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
        return Err(Error::Config("rates must be non-empty and lie in (0, 1)".into()));
    }
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("schedule must be strictly increasing".into()));
    }
    if let Some(&bad) = schedule.iter().find(|&&n| n < k0 || n % k0 != 0) {
        return Err(Error::Config(format!(
            "{bad} cohorts cannot form {k0} equal-sized clusters"
        )));
    }
    if n_per_cohort == 0 {
        return Err(Error::Config("cohort size must be ≥ 1".into()));
    }
    config.validate()?;

    schedule
        .par_iter()
        .enumerate()
        .map(|(j, &total)| {
            let mut rng = RngStream::new(seed, j as u64);
            let per_cluster = total / k0;
            let cohorts = (0..total)
                .map(|i| {
                    let p = rates[i / per_cluster];
                    let r = Binomial::new(n_per_cohort, p)
                        .expect("valid rate")
                        .sample(&mut rng);
                    CohortData::new(format!("C{}", i + 1), n_per_cohort, r)
                })
                .collect();
            let dataset = TrialDataset::new(cohorts)?;
            let draws = run_mfm(&dataset, config, &mut rng)?;
            let hits = draws.k_values().filter(|&k| k == k0).count();
            Ok(ProbeRow {
                cohorts: total,
                prob_true_k: hits as f64 / draws.len() as f64,
            })
        })
        .collect()
}
