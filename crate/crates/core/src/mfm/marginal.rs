use crate::data::CohortData;
use crate::error::{Error, Result};
use crate::stats::{ln_beta, log_choose};

/// Beta-binomial log marginal likelihood of one cohort,
/// ln [C(n, r) · B(r + α, n − r + β) / B(α, β)].
pub fn log_marginal(r: u64, n: u64, alpha: f64, beta: f64) -> Result<f64> {
    if r > n {
        return Err(Error::Domain(format!("r ({r}) exceeds n ({n})")));
    }
    if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(Error::Domain(format!(
            "alpha, beta must be positive, got ({alpha}, {beta})"
        )));
    }
    Ok(log_choose(n, r) + ln_beta(r as f64 + alpha, (n - r) as f64 + beta) - ln_beta(alpha, beta))
}

/// Log marginal likelihood of a group of cohorts sharing one response rate
/// drawn from Beta(α, β): Σ ln C(nᵢ, rᵢ) + ln B(α + R, β + N − R) − ln B(α, β),
/// with R and N the pooled counts.
pub fn cluster_log_marginal<'a>(
    cohorts: impl IntoIterator<Item = &'a CohortData>,
    alpha: f64,
    beta: f64,
) -> f64 {
    let (mut log_coef, mut r, mut n) = (0.0, 0u64, 0u64);
    for c in cohorts {
        log_coef += log_choose(c.n, c.r);
        r += c.r;
        n += c.n;
    }
    log_coef + ln_beta(alpha + r as f64, beta + (n - r) as f64) - ln_beta(alpha, beta)
}
