//! Integer arithmetic functions over (possibly partial) factorizations,
//! cyclotomic splitting of q^m − 1 and the W(t) < D·t^{1/ν} bound.

mod dbound;
mod factor;
pub mod primes;
pub mod rho;
mod table;

pub use dbound::{compute_d, compute_d_with_limit, WBoundParams, DEFAULT_SIEVE_LIMIT};
pub use factor::{cyclotomic_value, factor, factor_qm_minus_1, FactorEffort, Factorizer};
pub use primes::{divisors_u64, factor_u64, is_prime_u64, is_probable_prime, mult_order_u64, phi_u64};
pub use table::FactorTable;

use crate::error::{Error, Result};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// Multiset of prime powers with an optional composite cofactor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntFactorization {
    value: BigUint,
    factors: Vec<(BigUint, u32)>,
    cofactor: BigUint,
    external: bool,
}

impl IntFactorization {
    /// Assembles a factorization; `factors` may be unsorted and contain repeats.
    pub fn from_parts(
        value: BigUint,
        factors: impl IntoIterator<Item = (BigUint, u32)>,
        cofactor: BigUint,
        external: bool,
    ) -> Self {
        let mut map: BTreeMap<BigUint, u32> = BTreeMap::new();
        for (p, e) in factors {
            *map.entry(p).or_insert(0) += e;
        }
        let f = IntFactorization {
            value,
            factors: map.into_iter().filter(|(_, e)| *e > 0).collect(),
            cofactor,
            external,
        };
        debug_assert!(f.recombines());
        f
    }

    pub fn one() -> Self {
        IntFactorization {
            value: BigUint::one(),
            factors: Vec::new(),
            cofactor: BigUint::one(),
            external: false,
        }
    }

    /// Product of factorizations of pairwise coprime-or-overlapping pieces.
    pub fn product<'a>(parts: impl IntoIterator<Item = &'a IntFactorization>) -> Self {
        let mut value = BigUint::one();
        let mut cof = BigUint::one();
        let mut facs = Vec::new();
        let mut ext = false;
        for p in parts {
            value *= &p.value;
            cof *= &p.cofactor;
            facs.extend(p.factors.iter().cloned());
            ext |= p.external;
        }
        Self::from_parts(value, facs, cof, ext)
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }
    pub fn factors(&self) -> &[(BigUint, u32)] {
        &self.factors
    }
    pub fn cofactor(&self) -> &BigUint {
        &self.cofactor
    }
    pub fn is_complete(&self) -> bool {
        self.cofactor.is_one()
    }
    pub fn used_external(&self) -> bool {
        self.external
    }
    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.factors.iter().map(|(p, _)| p)
    }
    pub fn omega_known(&self) -> usize {
        self.factors.len()
    }

    /// "complete", "external" (complete with imported factors) or "partial".
    pub fn provenance(&self) -> &'static str {
        match (self.is_complete(), self.external) {
            (false, _) => "partial",
            (true, true) => "external",
            (true, false) => "complete",
        }
    }

    pub fn recombines(&self) -> bool {
        let mut acc = self.cofactor.clone();
        for (p, e) in &self.factors {
            acc *= p.pow(*e);
        }
        acc == self.value
    }

    pub(crate) fn require_complete(&self) -> Result<()> {
        if self.is_complete() {
            Ok(())
        } else {
            Err(Error::Incomplete {
                value: self.value.to_string(),
                cofactor: self.cofactor.to_string(),
            })
        }
    }

    /// Primes as u64, when they all fit.
    pub fn primes_u64(&self) -> Option<Vec<u64>> {
        self.primes().map(|p| p.to_u64()).collect()
    }
}

pub fn euler_phi(f: &IntFactorization) -> Result<BigUint> {
    f.require_complete()?;
    let mut acc = BigUint::one();
    for (p, e) in &f.factors {
        acc *= p.pow(e - 1) * (p - 1u32);
    }
    Ok(acc)
}

pub fn mobius(f: &IntFactorization) -> Result<i8> {
    f.require_complete()?;
    if f.factors.iter().any(|(_, e)| *e > 1) {
        Ok(0)
    } else if f.factors.len() % 2 == 0 {
        Ok(1)
    } else {
        Ok(-1)
    }
}

pub fn omega(f: &IntFactorization) -> Result<usize> {
    f.require_complete()?;
    Ok(f.factors.len())
}

pub fn big_w(f: &IntFactorization) -> Result<BigUint> {
    Ok(BigUint::one() << omega(f)?)
}

pub fn theta(f: &IntFactorization) -> Result<BigRational> {
    let phi = euler_phi(f)?;
    if f.value.is_zero() {
        return Err(Error::input("theta of zero"));
    }
    Ok(BigRational::new(phi.into(), f.value.clone().into()))
}

/// Number of unknown prime factors the cofactor can hold when every prime
/// below `trial_bound` has been removed: the largest t with B^t ≤ C.
pub fn unknown_prime_bound(f: &IntFactorization, trial_bound: &BigUint) -> Result<u32> {
    if *trial_bound < BigUint::from(2u32) {
        return Err(Error::input("trial bound must be at least 2"));
    }
    let c = &f.cofactor;
    let mut t = 0u32;
    let mut acc = trial_bound.clone();
    while &acc <= c {
        t += 1;
        acc *= trial_bound;
    }
    Ok(t)
}

/// 2^{ω_known + floor(log C / log B)}, an upper bound on W(value).
pub fn w_upper_bound(f: &IntFactorization, trial_bound: &BigUint) -> Result<BigUint> {
    let t = unknown_prime_bound(f, trial_bound)?;
    Ok(BigUint::one() << (f.omega_known() + t as usize))
}

/// Least e ≥ 1 with q^e ≡ 1 (mod n).
pub fn mult_order(q: &BigUint, n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::input("modulus must be positive"));
    }
    let r = primes::rem_small(q, n);
    mult_order_u64(r, n).ok_or_else(|| Error::input(format!("gcd(q, {n}) != 1")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(n: u64) -> IntFactorization {
        factor(&BigUint::from(n), &FactorEffort::default()).unwrap()
    }

    #[test]
    fn twelve() {
        let t = f(12);
        assert_eq!(euler_phi(&t).unwrap(), BigUint::from(4u32));
        assert_eq!(mobius(&t).unwrap(), 0);
        assert_eq!(omega(&t).unwrap(), 2);
        assert_eq!(big_w(&t).unwrap(), BigUint::from(4u32));
        assert_eq!(theta(&t).unwrap(), BigRational::new(1.into(), 3.into()));
        assert_eq!(theta(&f(2)).unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(w_upper_bound(&t, &BigUint::from(10u32)).unwrap(), BigUint::from(4u32));
    }

    #[test]
    fn incomplete_is_an_error() {
        let n = BigUint::from(1_000_003u64 * 1_000_033);
        let part = IntFactorization::from_parts(n.clone(), vec![], n.clone(), false);
        assert!(matches!(euler_phi(&part), Err(Error::Incomplete { .. })));
        assert!(matches!(big_w(&part), Err(Error::Incomplete { .. })));
        // n is just above 10^12, so the cofactor can hold two primes above 10^6
        let b = w_upper_bound(&part, &BigUint::from(1_000_000u32)).unwrap();
        assert_eq!(b, BigUint::from(4u32));
        assert!(w_upper_bound(&part, &BigUint::one()).is_err());
    }

    #[test]
    fn orders() {
        assert_eq!(mult_order(&BigUint::from(5u32), 13).unwrap(), 4);
        assert_eq!(mult_order(&BigUint::from(5u32), 16).unwrap(), 4);
        assert_eq!(mult_order(&BigUint::from(7u32), 1).unwrap(), 1);
        assert!(mult_order(&BigUint::from(5u32), 10).is_err());
    }
}
