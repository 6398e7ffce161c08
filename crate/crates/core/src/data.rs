//! Basket-trial inputs and the sampler configurations shared by every engine.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One disease cohort: `r` responders out of `n` patients, with an optional
/// benchmark (null) response rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortData {
    pub name: String,
    pub n: u64,
    pub r: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_t: Option<f64>,
}

impl CohortData {
    pub fn new(name: impl Into<String>, n: u64, r: u64) -> Self {
        Self {
            name: name.into(),
            n,
            r,
            p_t: None,
        }
    }

    pub fn with_benchmark(mut self, p_t: f64) -> Self {
        self.p_t = Some(p_t);
        self
    }

    pub fn raw_rate(&self) -> f64 {
        self.r as f64 / self.n as f64
    }
}

/// Every invariant violation in `cohorts`, in row order. Empty means valid.
pub fn validate(cohorts: &[CohortData]) -> Vec<String> {
    let mut issues = Vec::new();
    if cohorts.is_empty() {
        issues.push("empty dataset".to_string());
    }
    let mut seen = HashSet::new();
    for (i, c) in cohorts.iter().enumerate() {
        let row = i + 1;
        if c.n == 0 {
            issues.push(format!("row {row} ({}): n must be ≥ 1", c.name));
        }
        if c.r > c.n {
            issues.push(format!("row {row} ({}): r exceeds n", c.name));
        }
        if let Some(p) = c.p_t {
            if !(p > 0.0 && p < 1.0) {
                issues.push(format!("row {row} ({}): p_t must lie in (0, 1)", c.name));
            }
        }
        if !seen.insert(c.name.as_str()) {
            issues.push(format!("row {row}: duplicate cohort name {:?}", c.name));
        }
    }
    issues
}

/// An ordered, validated list of cohorts. Order is preserved in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<CohortData>", into = "Vec<CohortData>")]
pub struct TrialDataset {
    cohorts: Vec<CohortData>,
}

impl TrialDataset {
    pub fn new(cohorts: Vec<CohortData>) -> Result<Self> {
        let issues = validate(&cohorts);
        if issues.is_empty() {
            Ok(Self { cohorts })
        } else {
            Err(Error::Dataset(issues))
        }
    }

    /// Builds a dataset from `(name, n, r)` triples.
    pub fn from_counts<S: Into<String>>(rows: impl IntoIterator<Item = (S, u64, u64)>) -> Result<Self> {
        Self::new(
            rows.into_iter()
                .map(|(name, n, r)| CohortData::new(name, n, r))
                .collect(),
        )
    }

    /// The six-cohort vemurafenib basket trial in BRAF V600 nonmelanoma cancers.
    pub fn vemurafenib() -> Self {
        crate::io::parse_dataset_str(crate::io::VEMURAFENIB_CSV).expect("bundled dataset is valid")
    }

    pub fn cohorts(&self) -> &[CohortData] {
        &self.cohorts
    }

    pub fn len(&self) -> usize {
        self.cohorts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cohorts.is_empty()
    }

    pub fn subset(&self, indices: &[usize]) -> Vec<CohortData> {
        indices.iter().map(|&i| self.cohorts[i].clone()).collect()
    }

    pub fn pooled_rate(&self) -> f64 {
        let r: u64 = self.cohorts.iter().map(|c| c.r).sum();
        let n: u64 = self.cohorts.iter().map(|c| c.n).sum();
        r as f64 / n as f64
    }
}

impl TryFrom<Vec<CohortData>> for TrialDataset {
    type Error = Error;

    fn try_from(cohorts: Vec<CohortData>) -> Result<Self> {
        Self::new(cohorts)
    }
}

impl From<TrialDataset> for Vec<CohortData> {
    fn from(d: TrialDataset) -> Self {
        d.cohorts
    }
}

fn check_iterations(what: &str, iterations: usize, burn_in: usize) -> Result<()> {
    if iterations == 0 || burn_in >= iterations {
        return Err(Error::Config(format!(
            "{what}: burn_in ({burn_in}) must be smaller than iterations ({iterations})"
        )));
    }
    Ok(())
}

fn check_positive(what: &str, x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Config(format!("{what} must be positive, got {x}")));
    }
    Ok(())
}

/// Step one: the MFM partition sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfmConfig {
    /// Dirichlet concentration of the mixture weights.
    pub gamma: f64,
    /// Beta base measure on cluster response rates.
    pub alpha: f64,
    pub beta: f64,
    /// Rate of the zero-truncated Poisson prior on the number of components.
    pub lambda: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub init_clusters: usize,
}

impl Default for MfmConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            alpha: 1.0,
            beta: 1.0,
            lambda: 1.0,
            iterations: 5000,
            burn_in: 2000,
            init_clusters: 5,
        }
    }
}

impl MfmConfig {
    pub fn validate(&self) -> Result<()> {
        check_positive("gamma", self.gamma)?;
        check_positive("alpha", self.alpha)?;
        check_positive("beta", self.beta)?;
        check_positive("lambda", self.lambda)?;
        if self.init_clusters == 0 {
            return Err(Error::Config("init_clusters must be ≥ 1".into()));
        }
        check_iterations("mfm", self.iterations, self.burn_in)
    }
}

/// Berry-style hierarchical model: θ ~ N(μ, τ²), μ ~ N(0, mu_prior_sd²),
/// τ ~ half-normal(tau_prior_scale).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BhmConfig {
    pub mu_prior_sd: f64,
    pub tau_prior_scale: f64,
    pub iterations: usize,
    pub burn_in: usize,
}

impl Default for BhmConfig {
    /// Comparator protocol: 10000 iterations, 2000 burn-in.
    fn default() -> Self {
        Self {
            mu_prior_sd: 2.0,
            tau_prior_scale: 1.0,
            iterations: 10_000,
            burn_in: 2000,
        }
    }
}

impl BhmConfig {
    /// Within-cluster fits of the two-step procedure: 8000 iterations, 2000 burn-in.
    pub fn within_cluster() -> Self {
        Self {
            iterations: 8000,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("mu_prior_sd", self.mu_prior_sd)?;
        check_positive("tau_prior_scale", self.tau_prior_scale)?;
        check_iterations("bhm", self.iterations, self.burn_in)
    }
}

/// EXNEX comparator. Per-cohort vectors left as `None` are filled from
/// `plausible_rate` by [`ExnexConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExnexConfig {
    /// Prior probability of the exchangeable component, per cohort; a single
    /// entry is broadcast.
    pub pi_ex: Vec<f64>,
    /// Prior guess of the response rate, p̄.
    pub plausible_rate: f64,
    /// Mean of the normal prior on μ; defaults to logit(p̄).
    pub ex_mean: Option<f64>,
    pub ex_sd: f64,
    /// Half-normal scale on τ (location fixed at 0).
    pub tau_scale: f64,
    /// NEX means on the logit scale; default logit(p_t or p̄) per cohort.
    pub nex_means: Option<Vec<f64>>,
    /// NEX variances; default 1/(p̄(1 − p̄)), about one observation's worth.
    pub nex_vars: Option<Vec<f64>>,
    pub iterations: usize,
    pub burn_in: usize,
}

impl Default for ExnexConfig {
    fn default() -> Self {
        Self {
            pi_ex: vec![0.5],
            plausible_rate: 0.2,
            ex_mean: None,
            ex_sd: 2.0,
            tau_scale: 1.0,
            nex_means: None,
            nex_vars: None,
            iterations: 10_000,
            burn_in: 2000,
        }
    }
}

/// Fully specified EXNEX priors for a concrete dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ExnexPriors {
    pub pi_ex: Vec<f64>,
    pub ex_mean: f64,
    pub ex_sd: f64,
    pub tau_scale: f64,
    pub nex_means: Vec<f64>,
    pub nex_sds: Vec<f64>,
}

impl ExnexConfig {
    pub fn with_pi(mut self, pi: f64) -> Self {
        self.pi_ex = vec![pi];
        self
    }

    pub fn resolve(&self, cohorts: &[CohortData]) -> Result<ExnexPriors> {
        check_iterations("exnex", self.iterations, self.burn_in)?;
        check_positive("ex_sd", self.ex_sd)?;
        check_positive("tau_scale", self.tau_scale)?;
        let pbar = self.plausible_rate;
        if !(pbar > 0.0 && pbar < 1.0) {
            return Err(Error::Config(format!(
                "plausible_rate must lie in (0, 1), got {pbar}"
            )));
        }
        let n = cohorts.len();
        let per_cohort = |name: &str, v: &[f64]| -> Result<Vec<f64>> {
            match v.len() {
                1 => Ok(vec![v[0]; n]),
                len if len == n => Ok(v.to_vec()),
                len => Err(Error::Config(format!("{name} has {len} entries for {n} cohorts"))),
            }
        };
        let pi_ex = per_cohort("pi_ex", &self.pi_ex)?;
        if pi_ex.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Config("pi_ex entries must lie in [0, 1]".into()));
        }
        let logit_pbar = crate::stats::logit(pbar)?;
        let nex_means = match &self.nex_means {
            Some(v) => per_cohort("nex_means", v)?,
            None => cohorts
                .iter()
                .map(|c| c.p_t.map_or(Ok(logit_pbar), crate::stats::logit))
                .collect::<Result<_>>()?,
        };
        let nex_vars = match &self.nex_vars {
            Some(v) => per_cohort("nex_vars", v)?,
            None => vec![1.0 / (pbar * (1.0 - pbar)); n],
        };
        for &v in &nex_vars {
            check_positive("nex variance", v)?;
        }
        Ok(ExnexPriors {
            pi_ex,
            ex_mean: self.ex_mean.unwrap_or(logit_pbar),
            ex_sd: self.ex_sd,
            tau_scale: self.tau_scale,
            nex_means,
            nex_sds: nex_vars.iter().map(|v| v.sqrt()).collect(),
        })
    }
}

/// How step two picks the benchmark rate that offsets each cohort's logit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PtPolicy {
    /// A cohort's own `p_t` when present, otherwise `default`.
    Benchmark { default: f64 },
    /// The pooled observed rate of the cohort's cluster, clamped to
    /// [0.01, 0.99]. Cohort-level `p_t` values are ignored.
    ClusterPooled,
}

impl Default for PtPolicy {
    fn default() -> Self {
        PtPolicy::Benchmark { default: 0.15 }
    }
}

impl PtPolicy {
    pub fn resolve(&self, cohorts: &[CohortData]) -> Result<Vec<f64>> {
        let values = match *self {
            PtPolicy::Benchmark { default } => cohorts
                .iter()
                .map(|c| c.p_t.unwrap_or(default))
                .collect::<Vec<_>>(),
            PtPolicy::ClusterPooled => {
                let r: u64 = cohorts.iter().map(|c| c.r).sum();
                let n: u64 = cohorts.iter().map(|c| c.n).sum();
                vec![(r as f64 / n as f64).clamp(0.01, 0.99); cohorts.len()]
            }
        };
        if let Some(bad) = values.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(Error::Config(format!(
                "benchmark rate must lie in (0, 1), got {bad}"
            )));
        }
        Ok(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_valid_row() {
        assert!(validate(&[CohortData::new("A", 7, 2)]).is_empty());
    }

    #[test]
    fn rejects_zero_n() {
        let issues = validate(&[CohortData::new("A", 0, 0)]);
        assert_eq!(issues.len(), 1);
        assert!(issues[0].contains("n must be ≥ 1"));
    }

    #[test]
    fn rejects_r_above_n() {
        let issues = validate(&[CohortData::new("A", 5, 6)]);
        assert_eq!(issues.len(), 1);
        assert!(issues[0].contains("r exceeds n"));
    }

    #[test]
    fn reports_every_violation() {
        let issues = validate(&[
            CohortData::new("A", 0, 0),
            CohortData::new("A", 3, 4),
            CohortData::new("B", 3, 1).with_benchmark(1.5),
        ]);
        assert_eq!(issues.len(), 4, "{issues:?}");
        assert!(!validate(&[]).is_empty());
    }

    #[test]
    fn vemurafenib_rows_validate() {
        let d = TrialDataset::vemurafenib();
        assert_eq!(d.len(), 6);
        assert!(validate(d.cohorts()).is_empty());
        assert_eq!(d.cohorts()[0], CohortData::new("ATC", 7, 2));
    }

    #[test]
    fn config_checks() {
        assert!(MfmConfig::default().validate().is_ok());
        let bad = MfmConfig {
            burn_in: 5000,
            ..MfmConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(BhmConfig::within_cluster().validate().is_ok());
        assert_eq!(BhmConfig::within_cluster().iterations, 8000);
    }

    #[test]
    fn exnex_defaults_resolve() {
        let d = TrialDataset::vemurafenib();
        let p = ExnexConfig::default().resolve(d.cohorts()).unwrap();
        assert_eq!(p.pi_ex, vec![0.5; 6]);
        assert!((p.ex_mean - 0.25f64.ln()).abs() < 1e-12);
        assert!((p.nex_sds[0] - 2.5).abs() < 1e-12);
        assert!(ExnexConfig::default().with_pi(1.5).resolve(d.cohorts()).is_err());
    }

    #[test]
    fn pt_policy() {
        let cohorts = vec![
            CohortData::new("a", 10, 2).with_benchmark(0.3),
            CohortData::new("b", 10, 4),
        ];
        assert_eq!(PtPolicy::default().resolve(&cohorts).unwrap(), vec![0.3, 0.15]);
        assert_eq!(PtPolicy::ClusterPooled.resolve(&cohorts).unwrap(), vec![0.3, 0.3]);
        let zero = vec![CohortData::new("z", 10, 0)];
        assert_eq!(PtPolicy::ClusterPooled.resolve(&zero).unwrap(), vec![0.01]);
    }
}
