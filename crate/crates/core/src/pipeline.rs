//! The two-step MFM-BD procedure and the single-model comparators behind one
//! interface.
//!
//! Step one clusters cohorts with the MFM sampler and fixes the least-squares
//! partition; step two fits the hierarchical model separately inside each
//! cluster.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bhm::{run_bhm, summarize, CohortEstimate, Diagnostics};
use crate::data::{BhmConfig, ExnexConfig, MfmConfig, PtPolicy, TrialDataset};
use crate::error::{Error, Result};
use crate::exnex::{run_exnex, summarize_exnex};
use crate::mfm::{run_mfm, Partition};
use crate::rng::RngStream;
use crate::summary::{dahl_select, k_hat, KHat, MembershipMatrix};

/// Output of the two-step procedure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfmBdFit {
    /// Least-squares partition from step one.
    pub partition: Partition,
    /// Per-cohort estimates in input order, labeled with their cluster.
    pub estimates: Vec<CohortEstimate>,
    pub k_hat: KHat,
    pub co_clustering: MembershipMatrix,
    /// Zero-based index of the selected retained draw.
    pub dahl_index: usize,
    /// Step-two sampler diagnostics, one entry per cluster.
    pub cluster_diagnostics: Vec<Diagnostics>,
}

pub fn run_mfm_bd(
    dataset: &TrialDataset,
    mfm_config: &MfmConfig,
    bhm_config: &BhmConfig,
    pt_policy: PtPolicy,
    rng: &mut RngStream,
) -> Result<MfmBdFit> {
    bhm_config.validate()?;
    let draws = run_mfm(dataset, mfm_config, rng)?;
    let dahl = dahl_select(&draws.partitions)?;
    let k = k_hat(&draws.partitions, &dahl.partition);

    let blocks = dahl.partition.blocks();
    let streams: Vec<RngStream> = (0..blocks.len()).map(|s| rng.fork(s as u64 + 1)).collect();
    let fits: Vec<(Vec<CohortEstimate>, Diagnostics)> = blocks
        .par_iter()
        .zip(streams)
        .map(|(block, mut stream)| {
            let cohorts = dataset.subset(block);
            let p_t = pt_policy.resolve(&cohorts)?;
            let draws = run_bhm(&cohorts, &p_t, bhm_config, &mut stream)?;
            Ok((summarize(&draws, &cohorts, &p_t)?, draws.diagnostics))
        })
        .collect::<Result<_>>()?;

    let mut estimates: Vec<Option<CohortEstimate>> = vec![None; dataset.len()];
    let mut cluster_diagnostics = Vec::with_capacity(fits.len());
    for (label, (block, (ests, diag))) in blocks.iter().zip(fits).enumerate() {
        for (&i, mut est) in block.iter().zip(ests) {
            est.cluster = Some(label + 1);
            estimates[i] = Some(est);
        }
        cluster_diagnostics.push(diag);
    }

    Ok(MfmBdFit {
        partition: dahl.partition,
        estimates: estimates
            .into_iter()
            .map(|e| e.expect("every cohort is in a block"))
            .collect(),
        k_hat: k,
        co_clustering: dahl.co_clustering,
        dahl_index: dahl.index,
        cluster_diagnostics,
    })
}

/// All cohorts in a single hierarchical model.
pub fn run_berry(
    dataset: &TrialDataset,
    config: &BhmConfig,
    pt_policy: PtPolicy,
    rng: &mut RngStream,
) -> Result<Vec<CohortEstimate>> {
    let p_t = pt_policy.resolve(dataset.cohorts())?;
    let draws = run_bhm(dataset.cohorts(), &p_t, config, rng)?;
    summarize(&draws, dataset.cohorts(), &p_t)
}

pub fn run_exnex_estimates(
    dataset: &TrialDataset,
    config: &ExnexConfig,
    rng: &mut RngStream,
) -> Result<Vec<CohortEstimate>> {
    let draws = run_exnex(dataset.cohorts(), config, rng)?;
    summarize_exnex(&draws, dataset.cohorts())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    MfmBd,
    Berry,
    Exnex,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Berry, Method::Exnex, Method::MfmBd];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::MfmBd => "mfm-bd",
            Method::Berry => "berry",
            Method::Exnex => "exnex",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mfm-bd" => Ok(Method::MfmBd),
            "berry" => Ok(Method::Berry),
            "exnex" => Ok(Method::Exnex),
            other => Err(Error::Config(format!("unknown method {other:?}"))),
        }
    }
}

/// Every knob of the three methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSettings {
    pub mfm: MfmConfig,
    /// Within-cluster fits of MFM-BD.
    pub step_two: BhmConfig,
    /// The all-cohort hierarchical comparator.
    pub berry: BhmConfig,
    pub exnex: ExnexConfig,
    pub pt_policy: PtPolicy,
}

impl Default for MethodSettings {
    fn default() -> Self {
        Self {
            mfm: MfmConfig::default(),
            step_two: BhmConfig::within_cluster(),
            berry: BhmConfig::default(),
            exnex: ExnexConfig::default(),
            pt_policy: PtPolicy::default(),
        }
    }
}

/// Estimates of one method, plus the MFM-BD extras when applicable.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodFit {
    pub estimates: Vec<CohortEstimate>,
    pub mfm_bd: Option<MfmBdFit>,
}

pub fn fit_method(
    method: Method,
    dataset: &TrialDataset,
    settings: &MethodSettings,
    rng: &mut RngStream,
) -> Result<MethodFit> {
    Ok(match method {
        Method::MfmBd => {
            let fit = run_mfm_bd(
                dataset,
                &settings.mfm,
                &settings.step_two,
                settings.pt_policy,
                rng,
            )?;
            MethodFit {
                estimates: fit.estimates.clone(),
                mfm_bd: Some(fit),
            }
        }
        Method::Berry => MethodFit {
            estimates: run_berry(dataset, &settings.berry, settings.pt_policy, rng)?,
            mfm_bd: None,
        },
        Method::Exnex => MethodFit {
            estimates: run_exnex_estimates(dataset, &settings.exnex, rng)?,
            mfm_bd: None,
        },
    })
}
