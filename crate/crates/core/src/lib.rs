//! Basket-trial analysis by clustering cohorts on response rate and then
//! borrowing strength only within clusters.
//!
//! Step one samples cohort partitions under a mixture-of-finite-mixtures
//! prior with a collapsed Gibbs sampler ([`mfm`]) and summarizes them with the
//! least-squares draw ([`summary`]). Step two fits a Berry-style hierarchical
//! model inside each cluster ([`bhm`]). [`pipeline`] wires the two steps
//! together; [`exnex`] and the all-cohort hierarchical model are the
//! comparators, and [`sim`] runs the simulation studies.

pub mod bhm;
pub mod data;
pub mod error;
pub mod exnex;
pub mod io;
pub mod mcmc;
pub mod mfm;
pub mod pipeline;
pub mod probe;
pub mod rng;
pub mod sim;
pub mod stats;
pub mod summary;

pub use bhm::{run_bhm, BhmDraws, BhmState, CohortEstimate};
pub use data::{BhmConfig, CohortData, ExnexConfig, MfmConfig, PtPolicy, TrialDataset};
pub use error::{Error, Result};
pub use exnex::run_exnex;
pub use io::{parse_dataset, RunReport};
pub use mfm::{run_mfm, Partition, PartitionDraws};
pub use pipeline::{run_mfm_bd, Method, MethodSettings, MfmBdFit};
pub use rng::RngStream;
pub use sim::{exact_partition_posterior, run_study, Scenario, StudyConfig, StudySummary};
pub use summary::{dahl_select, k_hat};
