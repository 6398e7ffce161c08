//! Simulation studies: preset scenarios, replicate generation, accuracy
//! metrics, and the exact partition posterior for small datasets.

mod exact;
mod metrics;
mod scenario;
mod study;

pub use exact::{exact_partition_posterior, set_partitions, PartitionProbability, MAX_EXACT_COHORTS};
pub use metrics::{aab, amse};
pub use scenario::{generate_replicate, Scenario};
pub use study::{run_study, MethodMetrics, ReplicateResult, StudyConfig, StudySummary};
