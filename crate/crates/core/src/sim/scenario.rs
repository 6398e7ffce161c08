use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::data::{CohortData, TrialDataset};
use crate::error::{Error, Result};

/// Ten-cohort response-rate design with a common per-cohort sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: u8,
    pub rates: Vec<f64>,
    pub n: u64,
}

impl Scenario {
    /// Presets 1–5:
    ///
    /// | id | rates                                 |
    /// |----|---------------------------------------|
    /// | 1  | 0.4 × 10                              |
    /// | 2  | 0.2 × 5, 0.6 × 5                      |
    /// | 3  | 0.2 × 5, 0.5 × 5                      |
    /// | 4  | 0.1 × 3, 0.4 × 3, 0.7 × 4             |
    /// | 5  | 0.2 × 10                              |
    pub fn preset(id: u8, n: u64) -> Result<Self> {
        let groups: &[(f64, usize)] = match id {
            1 => &[(0.4, 10)],
            2 => &[(0.2, 5), (0.6, 5)],
            3 => &[(0.2, 5), (0.5, 5)],
            4 => &[(0.1, 3), (0.4, 3), (0.7, 4)],
            5 => &[(0.2, 10)],
            _ => return Err(Error::Config(format!("scenario must be 1..=5, got {id}"))),
        };
        if n == 0 {
            return Err(Error::Config("per-cohort sample size must be ≥ 1".into()));
        }
        let rates = groups
            .iter()
            .flat_map(|&(p, count)| std::iter::repeat_n(p, count))
            .collect();
        Ok(Self { id, rates, n })
    }

    /// Number of distinct true rates.
    pub fn true_k(&self) -> usize {
        let mut distinct: Vec<f64> = Vec::new();
        for &r in &self.rates {
            if !distinct.contains(&r) {
                distinct.push(r);
            }
        }
        distinct.len()
    }
}

/// Draws rᵢ ~ Binomial(n, pᵢ) independently for every cohort.
pub fn generate_replicate<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> TrialDataset {
    let cohorts = scenario
        .rates
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let r = Binomial::new(scenario.n, p)
                .expect("rates lie in (0, 1)")
                .sample(rng);
            CohortData::new(format!("C{}", i + 1), scenario.n, r)
        })
        .collect();
    TrialDataset::new(cohorts).expect("simulated cohorts are valid")
}
