//! Urn coefficients of the MFM partition prior,
//!
//!   V_N(t) = Σ_{k ≥ 1} k_(t) / (γk)^(N) · p(k),
//!
//! with k_(t) the falling factorial, (x)^(N) the rising factorial and p the
//! zero-truncated Poisson(λ) pmf. The new-cluster weight of the sampler uses
//! the ratio V_N(t+1)/V_N(t).

use serde::{Deserialize, Serialize};

use crate::stats::ln_gamma;

/// Hard cap on the number of series terms.
pub const MAX_SERIES_TERMS: usize = 2000;

const RELATIVE_TAIL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VTable {
    n: usize,
    gamma: f64,
    lambda: f64,
    /// ln V_N(t) for t = 0..=N+1.
    log_v: Vec<f64>,
}

impl VTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// ln V_N(t), for t ≤ N + 1.
    pub fn log_v(&self, t: usize) -> f64 {
        self.log_v[t]
    }

    /// ln [V_N(t+1) / V_N(t)], the prior penalty for opening cluster t+1.
    pub fn log_new_cluster_ratio(&self, t: usize) -> f64 {
        self.log_v[t + 1] - self.log_v[t]
    }
}

/// Tabulates ln V_N(t) for t = 0..=N+1.
pub fn compute_v_table(n: usize, gamma: f64, lambda: f64) -> VTable {
    assert!(n >= 1, "V table needs at least one cohort");
    assert!(gamma > 0.0 && lambda > 0.0);
    let log_v = (0..=n + 1).map(|t| log_v_series(n, t, gamma, lambda)).collect();
    VTable {
        n,
        gamma,
        lambda,
        log_v,
    }
}

fn log_v_series(n: usize, t: usize, gamma: f64, lambda: f64) -> f64 {
    // ln p(k) = k ln λ − λ − ln k! − ln(1 − e^{−λ}); the ln k! cancels
    // against the falling factorial's numerator.
    let log_norm = -lambda - (-(-lambda).exp_m1()).ln();
    let ln_lambda = lambda.ln();
    let nf = n as f64;
    let log_term = |k: usize| {
        let gk = gamma * k as f64;
        -ln_gamma((k - t) as f64 + 1.0) - (ln_gamma(gk + nf) - ln_gamma(gk)) + k as f64 * ln_lambda + log_norm
    };

    // Terms with k < t vanish (falling factorial is zero).
    let first = t.max(1);
    let mut acc = f64::NEG_INFINITY;
    let mut prev = f64::NEG_INFINITY;
    for k in first..first + MAX_SERIES_TERMS {
        let term = log_term(k);
        acc = log_add_exp(acc, term);
        // Once terms shrink by more than half per step the remaining tail is
        // bounded by the current term.
        if k > first && term - prev < -std::f64::consts::LN_2 && term - acc < RELATIVE_TAIL.ln() {
            break;
        }
        prev = term;
    }
    acc
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
