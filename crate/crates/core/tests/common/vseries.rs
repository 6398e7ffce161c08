//! Exact partial sums of the MFM coefficient series in rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub fn ln_bigint(x: &BigInt) -> f64 {
    assert!(x.is_positive());
    let bits = x.bits();
    if bits <= 60 {
        return (x.to_string().parse::<f64>().unwrap()).ln();
    }
    let shift = bits - 60;
    let top: BigInt = x >> shift;
    top.to_string().parse::<f64>().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn ln_rational(q: &BigRational) -> f64 {
    ln_bigint(q.numer()) - ln_bigint(q.denom())
}

/// Exact partial sum of
///   V_N(t) · (e^λ − 1) = Σ_{k ≥ max(t,1)} λ^k / ((k − t)! · Π_{i<N} (γk + i))
/// for integer γ and λ, truncated after `terms` terms.
pub fn scaled_v(n: usize, t: usize, gamma: u64, lambda: u64, terms: usize) -> BigRational {
    let mut sum = BigRational::zero();
    let start = t.max(1);
    for k in start..start + terms {
        let mut den = BigInt::one();
        for j in 1..=(k - t) {
            den *= BigInt::from(j);
        }
        for i in 0..n {
            den *= BigInt::from(gamma * k as u64 + i as u64);
        }
        let num = BigInt::from(lambda).pow(k as u32);
        sum += BigRational::new(num, den);
    }
    sum
}

/// ln V_N(t) for integer γ and λ, from 120 exact series terms.
pub fn log_v(n: usize, t: usize, gamma: u64, lambda: u64) -> f64 {
    ln_rational(&scaled_v(n, t, gamma, lambda, 120)) - (lambda as f64).exp_m1().ln()
}
