//! Special functions, log densities and the handful of random variates the
//! samplers need. Everything that feeds a sampler weight stays in log space.

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::error::{Error, Result};

pub const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// ln Γ(x) for finite x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma(x))
}

/// Unchecked ln Γ for internal callers whose arguments are positive by
/// construction.
#[inline]
pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// ln B(a, b). Arguments are ordered before evaluation so the result is
/// bit-symmetric in (a, b).
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    if !(a.is_finite() && a > 0.0 && b.is_finite() && b > 0.0) {
        return Err(Error::Domain(format!(
            "log_beta requires a, b > 0, got ({a}, {b})"
        )));
    }
    Ok(ln_beta(a, b))
}

#[inline]
pub(crate) fn ln_beta(a: f64, b: f64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    ln_gamma(lo) + ln_gamma(hi) - ln_gamma(lo + hi)
}

/// ln C(n, r).
#[inline]
pub fn log_choose(n: u64, r: u64) -> f64 {
    debug_assert!(r <= n);
    ln_gamma(n as f64 + 1.0) - ln_gamma(r as f64 + 1.0) - ln_gamma((n - r) as f64 + 1.0)
}

pub fn logit(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("logit requires 0 < p < 1, got {p}")));
    }
    Ok(p.ln() - (-p).ln_1p())
}

pub fn expit(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Binomial log-pmf of `r` successes in `n` trials with success
/// probability `p`. Boundary probabilities are handled exactly.
pub fn binomial_log_pmf(r: u64, n: u64, p: f64) -> f64 {
    if r > n {
        return f64::NEG_INFINITY;
    }
    let failures = (n - r) as f64;
    let succ = r as f64;
    let log_p = if r == 0 { 0.0 } else { succ * p.ln() };
    let log_q = if r == n { 0.0 } else { failures * (-p).ln_1p() };
    log_choose(n, r) + log_p + log_q
}

/// Binomial log-likelihood on the logit scale, dropping ln C(n, r):
/// r·x − n·ln(1 + eˣ), evaluated without overflow.
#[inline]
pub fn binomial_logit_kernel(r: u64, n: u64, x: f64) -> f64 {
    r as f64 * x - n as f64 * softplus(x)
}

/// ln(1 + eˣ)
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
pub fn normal_log_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * (LN_2PI + z * z) - sd.ln()
}

/// Half-normal log-density with scale `scale`: 2·N(x; 0, scale) for x > 0.
#[inline]
pub fn half_normal_log_pdf(x: f64, scale: f64) -> f64 {
    if x > 0.0 {
        std::f64::consts::LN_2 + normal_log_pdf(x, 0.0, scale)
    } else {
        f64::NEG_INFINITY
    }
}

/// ln Σ exp(xᵢ) with the max-shift. Returns −∞ for an empty or all −∞ input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

pub fn sample_beta<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> f64 {
    Beta::new(a, b)
        .expect("beta shape parameters must be positive")
        .sample(rng)
}

pub fn sample_normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    mean + sd * z
}

pub fn sample_half_normal<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    sample_normal(rng, 0.0, scale).abs()
}

/// Draws an index with probability proportional to `exp(log_weights[i])`.
///
/// Entries may be −∞ (zero weight); NaN and +∞ are rejected.
pub fn sample_categorical<R: Rng + ?Sized>(rng: &mut R, log_weights: &[f64]) -> Result<usize> {
    let mut max = f64::NEG_INFINITY;
    for &w in log_weights {
        if w.is_nan() || w == f64::INFINITY {
            return Err(Error::InvalidWeights);
        }
        max = max.max(w);
    }
    if max == f64::NEG_INFINITY {
        return Err(Error::InvalidWeights);
    }
    let total: f64 = log_weights.iter().map(|w| (w - max).exp()).sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in log_weights.iter().enumerate() {
        let wi = (w - max).exp();
        if wi > 0.0 {
            acc += wi;
            last = i;
            if u < acc {
                return Ok(i);
            }
        }
    }
    // Rounding can leave u marginally above the accumulated total.
    Ok(last)
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Linear-interpolated empirical quantile (type 7) of already sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
