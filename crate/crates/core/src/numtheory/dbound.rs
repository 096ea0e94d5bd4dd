//! log10 of D(ν) = Π_{p ≤ 2^ν} 2/p^{1/ν}, the constant in W(t) < D·t^{1/ν}.

use super::primes::PrimeSieve;
use crate::error::{Error, Result};

/// Largest sieve extent accepted by default (odd-only bitset, 16 MiB).
pub const DEFAULT_SIEVE_LIMIT: u64 = 1 << 28;

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WBoundParams {
    pub nu: f64,
    pub log10_d: f64,
    pub prime_count: usize,
    /// Primes left out of the product (they cannot divide the numbers bounded).
    pub excluded: Vec<u64>,
    /// Bound on the accumulated rounding error of `log10_d`.
    pub error_margin: f64,
}

impl WBoundParams {
    pub fn d(&self) -> f64 {
        10f64.powf(self.log10_d)
    }
}

pub fn compute_d(nu: f64, excluded: &[u64]) -> Result<WBoundParams> {
    compute_d_with_limit(nu, excluded, DEFAULT_SIEVE_LIMIT)
}

pub fn compute_d_with_limit(nu: f64, excluded: &[u64], limit: u64) -> Result<WBoundParams> {
    if !(nu > 1.0) || !nu.is_finite() {
        return Err(Error::input(format!("nu must exceed 1, got {nu}")));
    }
    let top = 2f64.powf(nu);
    if top > limit as f64 {
        return Err(Error::resource("prime sieve for 2^nu", format!("{top:.0}"), limit));
    }
    let top = top.floor() as u64;
    let sieve = PrimeSieve::new(top);
    let l2 = std::f64::consts::LOG10_2;
    let (mut sum, mut comp) = (0f64, 0f64);
    let mut count = 0usize;
    for p in sieve.iter() {
        if excluded.contains(&p) {
            continue;
        }
        let t = l2 - (p as f64).log10() / nu;
        if t <= 0.0 {
            continue;
        }
        // Neumaier summation
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
        count += 1;
    }
    let log10_d = sum + comp;
    Ok(WBoundParams {
        nu,
        log10_d,
        prime_count: count,
        excluded: excluded.to_vec(),
        error_margin: 4.0 * f64::EPSILON * (count as f64 + log10_d.abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nu_two() {
        let w = compute_d(2.0, &[]).unwrap();
        assert_eq!(w.prime_count, 2);
        assert!((w.d() - 4.0 / 6f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects() {
        assert!(compute_d(1.0, &[]).is_err());
        assert!(matches!(
            compute_d_with_limit(30.0, &[], 1 << 20),
            Err(Error::Resource { .. })
        ));
    }
}
