//! EXNEX comparator: each cohort's log-odds θᵢ = logit(pᵢ) follows either an
//! exchangeable N(μ, τ²) component (probability πᵢ) or its own fixed
//! N(mᵢ, sᵢ²) component. Component indicators are sampled explicitly so the
//! posterior exchangeability weight of each cohort is reported.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bhm::CohortEstimate;
use crate::data::{CohortData, ExnexConfig, ExnexPriors};
use crate::error::{Error, Result};
use crate::mcmc::AdaptiveScale;
use crate::rng::RngStream;
use crate::stats::{binomial_logit_kernel, expit, half_normal_log_pdf, logit, normal_log_pdf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExnexState {
    pub theta: Vec<f64>,
    /// `true` when the cohort currently sits in the exchangeable component.
    pub exchangeable: Vec<bool>,
    pub mu: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExnexDraws {
    pub theta: Vec<Vec<f64>>,
    /// Posterior mean of each cohort's exchangeability indicator.
    pub ex_weight: Vec<f64>,
    pub mu: Vec<f64>,
    pub tau: Vec<f64>,
    pub theta_acceptance: Vec<f64>,
}

impl ExnexDraws {
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }
}

/// Full-conditional probability that θ belongs to the exchangeable component.
pub fn ex_probability(theta: f64, pi: f64, mu: f64, tau: f64, nex_mean: f64, nex_sd: f64) -> f64 {
    if pi <= 0.0 {
        return 0.0;
    }
    if pi >= 1.0 {
        return 1.0;
    }
    let ex = pi.ln() + normal_log_pdf(theta, mu, tau);
    let nex = (-pi).ln_1p() + normal_log_pdf(theta, nex_mean, nex_sd);
    expit(ex - nex)
}

pub fn run_exnex(cohorts: &[CohortData], config: &ExnexConfig, rng: &mut RngStream) -> Result<ExnexDraws> {
    if cohorts.is_empty() {
        return Err(Error::Domain("EXNEX needs at least one cohort".into()));
    }
    let priors = config.resolve(cohorts)?;
    let theta: Vec<f64> = cohorts
        .iter()
        .map(|c| logit((c.r as f64 + 0.5) / (c.n as f64 + 1.0)))
        .collect::<Result<_>>()?;
    let state = ExnexState {
        mu: theta.iter().sum::<f64>() / theta.len() as f64,
        exchangeable: priors.pi_ex.iter().map(|&p| p >= 0.5).collect(),
        theta,
        tau: 1.0,
    };
    Ok(sample(
        cohorts,
        &priors,
        config.iterations,
        config.burn_in,
        state,
        rng,
    ))
}

fn sample<R: Rng + ?Sized>(
    cohorts: &[CohortData],
    priors: &ExnexPriors,
    iterations: usize,
    burn_in: usize,
    mut state: ExnexState,
    rng: &mut R,
) -> ExnexDraws {
    let n = cohorts.len();
    let kept = iterations - burn_in;
    let mut theta_prop: Vec<AdaptiveScale> = (0..n).map(|_| AdaptiveScale::new(1.0)).collect();
    let mut mu_prop = AdaptiveScale::new(1.0);
    let mut tau_prop = AdaptiveScale::new(0.5);

    let mut theta_draws = vec![Vec::with_capacity(kept); n];
    let mut ex_counts = vec![0u64; n];
    let mut mu_draws = Vec::with_capacity(kept);
    let mut tau_draws = Vec::with_capacity(kept);

    for iter in 0..iterations {
        if iter == burn_in {
            theta_prop.iter_mut().for_each(AdaptiveScale::freeze);
            mu_prop.freeze();
            tau_prop.freeze();
        }

        for i in 0..n {
            let p = ex_probability(
                state.theta[i],
                priors.pi_ex[i],
                state.mu,
                state.tau,
                priors.nex_means[i],
                priors.nex_sds[i],
            );
            state.exchangeable[i] = rng.random::<f64>() < p;
        }

        let (mu, tau) = (state.mu, state.tau);
        for i in 0..n {
            let c = &cohorts[i];
            let (m, s) = if state.exchangeable[i] {
                (mu, tau)
            } else {
                (priors.nex_means[i], priors.nex_sds[i])
            };
            let target = |t: f64| binomial_logit_kernel(c.r, c.n, t) + normal_log_pdf(t, m, s);
            let lp = target(state.theta[i]);
            state.theta[i] = theta_prop[i].step(rng, state.theta[i], lp, target).0;
        }

        let ex_theta: Vec<f64> = state
            .theta
            .iter()
            .zip(&state.exchangeable)
            .filter_map(|(&t, &ex)| ex.then_some(t))
            .collect();

        let mu_target = |m: f64| {
            ex_theta.iter().map(|&t| normal_log_pdf(t, m, tau)).sum::<f64>()
                + normal_log_pdf(m, priors.ex_mean, priors.ex_sd)
        };
        let lp = mu_target(state.mu);
        state.mu = mu_prop.step(rng, state.mu, lp, mu_target).0;

        let mu = state.mu;
        let log_tau_target = |eta: f64| {
            let tau = eta.exp();
            ex_theta.iter().map(|&t| normal_log_pdf(t, mu, tau)).sum::<f64>()
                + half_normal_log_pdf(tau, priors.tau_scale)
                + eta
        };
        let eta = state.tau.ln();
        let lp = log_tau_target(eta);
        state.tau = tau_prop.step(rng, eta, lp, log_tau_target).0.exp();

        if iter >= burn_in {
            for i in 0..n {
                theta_draws[i].push(state.theta[i]);
                ex_counts[i] += u64::from(state.exchangeable[i]);
            }
            mu_draws.push(state.mu);
            tau_draws.push(state.tau);
        }
    }

    ExnexDraws {
        theta: theta_draws,
        ex_weight: ex_counts.iter().map(|&c| c as f64 / kept as f64).collect(),
        mu: mu_draws,
        tau: tau_draws,
        theta_acceptance: theta_prop.iter().map(AdaptiveScale::acceptance_rate).collect(),
    }
}

/// Posterior mean and 95% interval of pᵢ = expit(θᵢ).
pub fn summarize_exnex(draws: &ExnexDraws, cohorts: &[CohortData]) -> Result<Vec<CohortEstimate>> {
    if draws.is_empty() {
        return Err(Error::EmptyDraws);
    }
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
        .map(|(c, theta)| {
            let mut p: Vec<f64> = theta.iter().map(|&t| expit(t)).collect();
            CohortEstimate::from_draws(c.name.clone(), &mut p)
        })
        .collect())
}
