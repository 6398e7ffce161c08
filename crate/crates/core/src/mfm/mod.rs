//! Step one: clustering cohorts by response rate under a mixture of finite
//! mixtures prior, sampled with a collapsed Gibbs sweep.

mod marginal;
mod partition;
mod sampler;
mod vtable;

pub use marginal::{cluster_log_marginal, log_marginal};
pub use partition::{canonicalize, Partition};
pub use sampler::{
    run_mfm, update_assignments, update_cluster_params, ClusterParams, MfmState, PartitionDraws,
};
pub use vtable::{compute_v_table, VTable, MAX_SERIES_TERMS};
