//! Berry-style hierarchical model for cohort response rates.
//!
//! θⱼ = logit(pⱼ) − logit(p_Tj), θⱼ ~ N(μ, τ²), μ ~ N(0, mu_prior_sd²),
//! τ ~ half-normal(tau_prior_scale), rⱼ ~ Binomial(nⱼ, pⱼ).
//! Sampled by adaptive random-walk Metropolis-within-Gibbs: θⱼ and μ on
//! their natural scale, τ on the log scale.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{BhmConfig, CohortData};
use crate::error::{Error, Result};
use crate::mcmc::AdaptiveScale;
use crate::rng::RngStream;
use crate::stats::{
    binomial_logit_kernel, expit, half_normal_log_pdf, log_choose, logit, normal_log_pdf, quantile_sorted,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BhmState {
    pub theta: Vec<f64>,
    pub mu: f64,
    pub tau: f64,
}

/// Retained draws, stored per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BhmDraws {
    /// `theta[j]` holds the draws of cohort j's effect.
    pub theta: Vec<Vec<f64>>,
    pub mu: Vec<f64>,
    pub tau: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl BhmDraws {
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }
}

/// Post burn-in acceptance rates and the frozen proposal scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub theta_acceptance: Vec<f64>,
    pub mu_acceptance: f64,
    pub tau_acceptance: f64,
    pub theta_scale: Vec<f64>,
    pub mu_scale: f64,
    pub log_tau_scale: f64,
}

/// Posterior summary of one cohort's response rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortEstimate {
    pub cohort: String,
    pub mean: f64,
    pub median: f64,
    /// Equal-tailed 95% credible interval.
    pub ci_low: f64,
    pub ci_high: f64,
    /// One-based cluster label when produced by the two-step procedure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<usize>,
}

impl CohortEstimate {
    /// Summarizes draws of a response rate. `draws` is sorted in place.
    pub fn from_draws(cohort: impl Into<String>, draws: &mut [f64]) -> Self {
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        draws.sort_by(f64::total_cmp);
        Self {
            cohort: cohort.into(),
            mean,
            median: quantile_sorted(draws, 0.5),
            ci_low: quantile_sorted(draws, 0.025),
            ci_high: quantile_sorted(draws, 0.975),
            cluster: None,
        }
    }
}

fn offsets(cohorts: &[CohortData], p_t: &[f64]) -> Result<Vec<f64>> {
    if cohorts.is_empty() {
        return Err(Error::Domain(
            "hierarchical model needs at least one cohort".into(),
        ));
    }
    if p_t.len() != cohorts.len() {
        return Err(Error::Dimension(format!(
            "{} benchmark rates for {} cohorts",
            p_t.len(),
            cohorts.len()
        )));
    }
    p_t.iter().map(|&p| logit(p)).collect()
}

/// Joint log density of `state` up to the constant of the priors'
/// normalizers; binomial coefficients are included.
pub fn bhm_log_posterior(state: &BhmState, cohorts: &[CohortData], p_t: &[f64], config: &BhmConfig) -> f64 {
    if state.tau.is_nan() || state.tau <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let mut lp = 0.0;
    for ((c, &theta), &pt) in cohorts.iter().zip(&state.theta).zip(p_t) {
        let x = theta + logit(pt).unwrap_or(f64::NAN);
        lp += log_choose(c.n, c.r) + binomial_logit_kernel(c.r, c.n, x);
        lp += normal_log_pdf(theta, state.mu, state.tau);
    }
    lp + normal_log_pdf(state.mu, 0.0, config.mu_prior_sd)
        + half_normal_log_pdf(state.tau, config.tau_prior_scale)
}

/// Empirical-logit starting point: θⱼ = logit((rⱼ + ½)/(nⱼ + 1)) − logit(p_Tj),
/// μ = mean θ, τ = 1.
pub fn initial_state(cohorts: &[CohortData], offsets: &[f64]) -> BhmState {
    let theta: Vec<f64> = cohorts
        .iter()
        .zip(offsets)
        .map(|(c, off)| {
            let p = (c.r as f64 + 0.5) / (c.n as f64 + 1.0);
            logit(p).expect("empirical rate lies in (0, 1)") - off
        })
        .collect();
    let mu = theta.iter().sum::<f64>() / theta.len() as f64;
    BhmState { theta, mu, tau: 1.0 }
}

/// Fits the hierarchical model to `cohorts` with benchmark rates `p_t`.
///
/// Proposal scales adapt toward 0.44 acceptance during burn-in and are frozen
/// afterwards.
pub fn run_bhm(
    cohorts: &[CohortData],
    p_t: &[f64],
    config: &BhmConfig,
    rng: &mut RngStream,
) -> Result<BhmDraws> {
    config.validate()?;
    let off = offsets(cohorts, p_t)?;
    let state = initial_state(cohorts, &off);
    Ok(sample(cohorts, &off, config, state, rng))
}

fn sample<R: Rng + ?Sized>(
    cohorts: &[CohortData],
    off: &[f64],
    config: &BhmConfig,
    mut state: BhmState,
    rng: &mut R,
) -> BhmDraws {
    let n = cohorts.len();
    let kept = config.iterations - config.burn_in;
    let mut theta_prop: Vec<AdaptiveScale> = (0..n).map(|_| AdaptiveScale::new(1.0)).collect();
    let mut mu_prop = AdaptiveScale::new(1.0);
    let mut tau_prop = AdaptiveScale::new(0.5);

    let mut theta_draws = vec![Vec::with_capacity(kept); n];
    let mut mu_draws = Vec::with_capacity(kept);
    let mut tau_draws = Vec::with_capacity(kept);

    for iter in 0..config.iterations {
        if iter == config.burn_in {
            theta_prop.iter_mut().for_each(AdaptiveScale::freeze);
            mu_prop.freeze();
            tau_prop.freeze();
        }

        let (mu, tau) = (state.mu, state.tau);
        for j in 0..n {
            let c = &cohorts[j];
            let target = |t: f64| binomial_logit_kernel(c.r, c.n, t + off[j]) + normal_log_pdf(t, mu, tau);
            let lp = target(state.theta[j]);
            state.theta[j] = theta_prop[j].step(rng, state.theta[j], lp, target).0;
        }

        let theta = &state.theta;
        let mu_target = |m: f64| {
            theta.iter().map(|&t| normal_log_pdf(t, m, tau)).sum::<f64>()
                + normal_log_pdf(m, 0.0, config.mu_prior_sd)
        };
        let lp = mu_target(state.mu);
        state.mu = mu_prop.step(rng, state.mu, lp, mu_target).0;

        let mu = state.mu;
        let log_tau_target = |eta: f64| {
            let tau = eta.exp();
            theta.iter().map(|&t| normal_log_pdf(t, mu, tau)).sum::<f64>()
                + half_normal_log_pdf(tau, config.tau_prior_scale)
                + eta
        };
        let eta = state.tau.ln();
        let lp = log_tau_target(eta);
        state.tau = tau_prop.step(rng, eta, lp, log_tau_target).0.exp();

        if iter >= config.burn_in {
            for (d, &t) in theta_draws.iter_mut().zip(&state.theta) {
                d.push(t);
            }
            mu_draws.push(state.mu);
            tau_draws.push(state.tau);
        }
    }

    BhmDraws {
        theta: theta_draws,
        mu: mu_draws,
        tau: tau_draws,
        diagnostics: Diagnostics {
            theta_acceptance: theta_prop.iter().map(AdaptiveScale::acceptance_rate).collect(),
            mu_acceptance: mu_prop.acceptance_rate(),
            tau_acceptance: tau_prop.acceptance_rate(),
            theta_scale: theta_prop.iter().map(AdaptiveScale::scale).collect(),
            mu_scale: mu_prop.scale(),
            log_tau_scale: tau_prop.scale(),
        },
    }
}

/// Posterior mean and 95% interval of pⱼ = expit(θⱼ + logit(p_Tj)).
pub fn summarize(draws: &BhmDraws, cohorts: &[CohortData], p_t: &[f64]) -> Result<Vec<CohortEstimate>> {
    if draws.is_empty() {
        return Err(Error::EmptyDraws);
    }
    let off = offsets(cohorts, p_t)?;
    if draws.theta.len() != cohorts.len() {
        return Err(Error::Dimension(format!(
            "draws for {} cohorts, {} cohorts given",
            draws.theta.len(),
            cohorts.len()
        )));
    }
    Ok(cohorts
        .iter()
        .zip(&draws.theta)
        .zip(&off)
        .map(|((c, theta), &o)| {
            let mut p: Vec<f64> = theta.iter().map(|t| expit(t + o)).collect();
            CohortEstimate::from_draws(c.name.clone(), &mut p)
        })
        .collect())
}
