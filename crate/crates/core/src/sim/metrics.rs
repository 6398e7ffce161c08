use crate::error::{Error, Result};
use crate::stats::compensated_sum;

fn check(estimates: &[Vec<f64>], truth: &[f64]) -> Result<()> {
    if estimates.is_empty() {
        return Err(Error::Dimension("no replicates".into()));
    }
    if truth.is_empty() {
        return Err(Error::Dimension("no cohorts".into()));
    }
    if let Some(bad) = estimates.iter().find(|e| e.len() != truth.len()) {
        return Err(Error::Dimension(format!(
            "replicate with {} cohorts against {} true values",
            bad.len(),
            truth.len()
        )));
    }
    Ok(())
}

/// Average absolute bias: mean over cohorts of |mean over replicates of
/// (estimate − truth)|. `estimates[r][i]` is replicate r, cohort i.
pub fn aab(estimates: &[Vec<f64>], truth: &[f64]) -> Result<f64> {
    check(estimates, truth)?;
    let reps = estimates.len() as f64;
    let per_cohort = truth
        .iter()
        .enumerate()
        .map(|(i, &t)| (compensated_sum(estimates.iter().map(|e| e[i] - t)) / reps).abs());
    Ok(compensated_sum(per_cohort) / truth.len() as f64)
}

/// Mean over cohorts of the root-mean-square error across replicates.
pub fn amse(estimates: &[Vec<f64>], truth: &[f64]) -> Result<f64> {
    check(estimates, truth)?;
    let reps = estimates.len() as f64;
    let per_cohort = truth
        .iter()
        .enumerate()
        .map(|(i, &t)| (compensated_sum(estimates.iter().map(|e| (e[i] - t).powi(2))) / reps).sqrt());
    Ok(compensated_sum(per_cohort) / truth.len() as f64)
}
