//! Adaptive random-walk Metropolis building blocks shared by the
//! hierarchical-model samplers.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::stats::sample_normal;

/// Acceptance rate the proposal scales are tuned toward.
pub const TARGET_ACCEPTANCE: f64 = 0.44;

/// Gaussian random-walk proposal whose log scale follows a Robbins-Monro
/// recursion toward [`TARGET_ACCEPTANCE`] until frozen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveScale {
    log_scale: f64,
    steps: u64,
    frozen: bool,
    accepted: u64,
    proposed: u64,
}

impl AdaptiveScale {
    pub fn new(scale: f64) -> Self {
        Self {
            log_scale: scale.ln(),
            steps: 0,
            frozen: false,
            accepted: 0,
            proposed: 0,
        }
    }

    pub fn scale(&self) -> f64 {
        self.log_scale.exp()
    }

    /// Stops adaptation and resets the acceptance counters.
    pub fn freeze(&mut self) {
        self.frozen = true;
        self.accepted = 0;
        self.proposed = 0;
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    /// One Metropolis step for a scalar coordinate with log target
    /// `log_target`. `current_lp` is the target at `current`; returns the new
    /// value and its log target.
    pub fn step<R, F>(&mut self, rng: &mut R, current: f64, current_lp: f64, log_target: F) -> (f64, f64)
    where
        R: Rng + ?Sized,
        F: FnOnce(f64) -> f64,
    {
        let proposal = sample_normal(rng, current, self.scale());
        let proposal_lp = log_target(proposal);
        let log_ratio = proposal_lp - current_lp;
        let accept = log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio;
        self.record(accept);
        if accept {
            (proposal, proposal_lp)
        } else {
            (current, current_lp)
        }
    }

    fn record(&mut self, accepted: bool) {
        self.proposed += 1;
        if accepted {
            self.accepted += 1;
        }
        if !self.frozen {
            self.steps += 1;
            let gain = (self.steps as f64).powf(-0.6).min(1.0);
            let a = if accepted { 1.0 } else { 0.0 };
            self.log_scale = (self.log_scale + gain * (a - TARGET_ACCEPTANCE)).clamp(-12.0, 5.0);
        }
    }
}
