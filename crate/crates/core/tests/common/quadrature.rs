//! Deterministic quadrature oracles for the logit-normal models. These share
//! no code with the samplers.

fn log_kernel(r: u64, n: u64, x: f64) -> f64 {
    // r·x − n·log(1 + eˣ), written out independently of the crate's helpers
    let sp = if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    };
    r as f64 * x - n as f64 * sp
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn simpson_weights(m: usize, h: f64) -> Vec<f64> {
    assert!(m % 2 == 1 && m >= 3);
    (0..m)
        .map(|i| {
            let c = if i == 0 || i == m - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect()
}

fn grid(lo: f64, hi: f64, m: usize) -> (Vec<f64>, Vec<f64>) {
    let h = (hi - lo) / (m - 1) as f64;
    ((0..m).map(|i| lo + i as f64 * h).collect(), simpson_weights(m, h))
}

/// ∫ f(θ) N(θ; mean, sd²) dθ over the standardized variable.
struct Inner {
    z: Vec<f64>,
    w: Vec<f64>,
}

impl Inner {
    fn new() -> Self {
        let (z, w) = grid(-9.0, 9.0, 801);
        let w = z.iter().zip(w).map(|(z, w)| w * (-0.5 * z * z).exp()).collect();
        Self { z, w }
    }

    /// Returns (log ∫ L φ, E[p | r, mean, sd]) for one binomial cohort with
    /// p = logistic(θ + offset).
    fn cohort(&self, r: u64, n: u64, offset: f64, mean: f64, sd: f64) -> (f64, f64) {
        let lk: Vec<f64> = self
            .z
            .iter()
            .map(|z| log_kernel(r, n, mean + sd * z + offset))
            .collect();
        let mx = lk.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (mut s, mut sp) = (0.0, 0.0);
        for ((z, w), l) in self.z.iter().zip(&self.w).zip(&lk) {
            let e = w * (l - mx).exp();
            s += e;
            sp += e * logistic(mean + sd * z + offset);
        }
        (s.ln() + mx, sp / s)
    }
}

/// Posterior mean of p for one cohort under θ ~ N(mean, sd²), p = logistic(θ).
pub fn independent_mean(r: u64, n: u64, mean: f64, sd: f64) -> f64 {
    Inner::new().cohort(r, n, 0.0, mean, sd).1
}

/// Posterior means of p_j under
///   logit(p_j) = θ_j + offset_j, θ_j ~ N(μ, τ²), μ ~ N(mu_mean, mu_sd²),
///   τ ~ half-normal(tau_scale).
/// Integrates θ_j analytically conditional on (μ, τ) by 1-D quadrature, and
/// (μ, τ) on a 2-D Simpson grid.
pub fn hierarchical_means(
    data: &[(u64, u64)],
    offsets: &[f64],
    mu_mean: f64,
    mu_sd: f64,
    tau_scale: f64,
) -> Vec<f64> {
    assert_eq!(data.len(), offsets.len());
    let inner = Inner::new();
    let (mus, wmu) = grid(mu_mean - 8.0 * mu_sd, mu_mean + 8.0 * mu_sd, 401);
    let (taus, wtau) = grid(0.0, 7.0 * tau_scale, 281);
    let mut logw = Vec::with_capacity(mus.len() * taus.len());
    let mut cond = Vec::with_capacity(mus.len() * taus.len());
    for (mu, wm) in mus.iter().zip(&wmu) {
        for (tau, wt) in taus.iter().zip(&wtau) {
            let mut lw = wm.ln() + wt.ln();
            lw += -0.5 * ((mu - mu_mean) / mu_sd).powi(2) - 0.5 * (tau / tau_scale).powi(2);
            let mut means = Vec::with_capacity(data.len());
            for (&(r, n), &off) in data.iter().zip(offsets) {
                if *tau == 0.0 {
                    // degenerate normal: θ = μ
                    let x = mu + off;
                    lw += log_kernel(r, n, x);
                    means.push(logistic(x));
                } else {
                    let (l, e) = inner.cohort(r, n, off, *mu, *tau);
                    lw += l - (2.0 * std::f64::consts::PI).sqrt().ln();
                    means.push(e);
                }
            }
            logw.push(lw);
            cond.push(means);
        }
    }
    let mx = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    let mut acc = vec![0.0; data.len()];
    for (lw, means) in logw.iter().zip(&cond) {
        let w = (lw - mx).exp();
        total += w;
        for (a, m) in acc.iter_mut().zip(means) {
            *a += w * m;
        }
    }
    acc.iter().map(|a| a / total).collect()
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}
