//! Trial division, rho splitting and cyclotomic pre-splitting of p^N − 1.

use super::primes::{
    divisors_u64, factor_u64, is_probable_prime, mobius_u64, rem_small, small_primes,
    small_sieve, SMALL_PRIME_LIMIT,
};
use super::rho::rho_big;
use super::table::FactorTable;
use super::IntFactorization;
use crate::error::{Error, Result};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Budget for factoring.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FactorEffort {
    /// Every prime below this bound is removed by trial division (≤ 10^6).
    pub trial_bound: u64,
    /// Rho iterations per composite.
    pub rho_iterations: u64,
    /// Composites above this many bits are left as cofactor without trying rho.
    pub rho_max_bits: u64,
    pub seed: u64,
}

impl Default for FactorEffort {
    fn default() -> Self {
        FactorEffort {
            trial_bound: SMALL_PRIME_LIMIT,
            rho_iterations: 1 << 20,
            rho_max_bits: 240,
            seed: 0x5eed,
        }
    }
}

impl FactorEffort {
    fn bound(&self) -> u64 {
        self.trial_bound.clamp(2, SMALL_PRIME_LIMIT)
    }
}

struct Acc {
    factors: Vec<(BigUint, u32)>,
    cofactor: BigUint,
}

fn divide_out(rem: &mut BigUint, p: u64, acc: &mut Acc) {
    if rem_small(rem, p) != 0 {
        return;
    }
    let mut e = 0;
    let pb = BigUint::from(p);
    while rem_small(rem, p) == 0 {
        *rem /= &pb;
        e += 1;
    }
    acc.factors.push((pb, e));
}

/// Classifies what remains after trial division to `bound`, splitting composites with rho.
fn finish(rem: BigUint, bound: u64, effort: &FactorEffort, acc: &mut Acc) {
    let b2 = BigUint::from(bound) * BigUint::from(bound);
    let mut stack = vec![rem];
    let mut salt = 0u64;
    while let Some(c) = stack.pop() {
        if c.is_one() {
            continue;
        }
        if c < b2 || is_probable_prime(&c) {
            acc.factors.push((c, 1));
            continue;
        }
        // perfect squares defeat nothing here but are cheap to catch
        let r = c.sqrt();
        if &r * &r == c {
            stack.push(r.clone());
            stack.push(r);
            continue;
        }
        salt += 1;
        if c.bits() > effort.rho_max_bits {
            acc.cofactor *= c;
            continue;
        }
        match rho_big(&c, effort.seed.wrapping_add(salt), effort.rho_iterations) {
            Some(f) => {
                let g = &c / &f;
                stack.push(f);
                stack.push(g);
            }
            None => acc.cofactor *= c,
        }
    }
}

/// Factorization within the given budget; partial results carry a composite cofactor.
pub fn factor(n: &BigUint, effort: &FactorEffort) -> Result<IntFactorization> {
    if n.is_zero() {
        return Err(Error::input("cannot factor 0"));
    }
    let bound = effort.bound();
    let mut acc = Acc {
        factors: Vec::new(),
        cofactor: BigUint::one(),
    };
    let mut rem = n.clone();
    for &p in small_primes() {
        if p >= bound {
            break;
        }
        if BigUint::from(p * p) > rem {
            break;
        }
        divide_out(&mut rem, p, &mut acc);
    }
    finish(rem, bound, effort, &mut acc);
    Ok(IntFactorization::from_parts(n.clone(), acc.factors, acc.cofactor, false))
}

/// Φ_D(p) as an exact product of (p^d − 1)^{μ(D/d)}.
pub fn cyclotomic_value(d: u64, p: &BigUint) -> BigUint {
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for e in divisors_u64(d) {
        let t = p.pow(e as u32) - 1u32;
        match mobius_u64(d / e) {
            1 => num *= t,
            -1 => den *= t,
            _ => {}
        }
    }
    num / den
}

/// Factoring engine with an external table and a cache of cyclotomic pieces.
pub struct Factorizer {
    effort: FactorEffort,
    table: Option<Arc<FactorTable>>,
    cache: Mutex<HashMap<(u64, u64), Arc<IntFactorization>>>,
}

impl Factorizer {
    pub fn new(effort: FactorEffort, table: Option<Arc<FactorTable>>) -> Self {
        Factorizer {
            effort,
            table,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn effort(&self) -> &FactorEffort {
        &self.effort
    }

    pub fn trial_bound(&self) -> BigUint {
        BigUint::from(self.effort.bound())
    }

    /// Factorization of Φ_D(p). Prime divisors of Φ_D(p) either divide D or are ≡ 1 (mod D),
    /// so trial division only visits those.
    pub fn cyclotomic_piece(&self, p: u64, d: u64) -> Arc<IntFactorization> {
        if let Some(f) = self.cache.lock().unwrap().get(&(p, d)) {
            return f.clone();
        }
        let value = cyclotomic_value(d, &BigUint::from(p));
        let f = Arc::new(self.factor_piece(&value, d));
        self.cache.lock().unwrap().insert((p, d), f.clone());
        f
    }

    fn factor_piece(&self, value: &BigUint, d: u64) -> IntFactorization {
        let bound = self.effort.bound();
        let mut acc = Acc {
            factors: Vec::new(),
            cofactor: BigUint::one(),
        };
        let mut rem = value.clone();
        let mut external = false;
        if let Some(t) = &self.table {
            for q in t.primes() {
                let before = acc.factors.len();
                if q.bits() <= 64 {
                    let qq = u64::try_from(q).unwrap();
                    divide_out(&mut rem, qq, &mut acc);
                } else {
                    let mut e = 0;
                    while (&rem % q).is_zero() {
                        rem /= q;
                        e += 1;
                    }
                    if e > 0 {
                        acc.factors.push((q.clone(), e));
                    }
                }
                if acc.factors.len() > before && *q >= BigUint::from(bound) {
                    external = true;
                }
            }
        }
        for (l, _) in factor_u64(d) {
            if l < bound {
                divide_out(&mut rem, l, &mut acc);
            }
        }
        let sieve = small_sieve();
        let mut c = d + 1;
        while c < bound {
            if BigUint::from(c) * BigUint::from(c) > rem {
                break;
            }
            if sieve.contains(c) {
                divide_out(&mut rem, c, &mut acc);
            }
            c += d;
        }
        finish(rem, bound, &self.effort, &mut acc);
        IntFactorization::from_parts(value.clone(), acc.factors, acc.cofactor, external)
    }

    /// Factorization of p^{km} − 1 assembled from the pieces Φ_D(p), D | km.
    pub fn factor_qm_minus_1(&self, p: u64, k: u64, m: u64) -> Result<IntFactorization> {
        if !super::is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        if k == 0 || m == 0 {
            return Err(Error::input("k and m must be positive"));
        }
        let n = k * m;
        let pieces: Vec<_> = divisors_u64(n)
            .into_iter()
            .map(|d| self.cyclotomic_piece(p, d))
            .collect();
        let f = IntFactorization::product(pieces.iter().map(|a| a.as_ref()));
        if !f.recombines() {
            return Err(Error::Integrity(format!("pieces of {p}^{n}-1 do not recombine")));
        }
        Ok(f)
    }
}

/// One-shot factorization of q^m − 1 with q = p^k.
pub fn factor_qm_minus_1(
    p: u64,
    k: u64,
    m: u64,
    table: Option<Arc<FactorTable>>,
    effort: &FactorEffort,
) -> Result<IntFactorization> {
    Factorizer::new(effort.clone(), table).factor_qm_minus_1(p, k, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn primes_of(f: &IntFactorization) -> Vec<u64> {
        f.primes_u64().unwrap()
    }

    #[test]
    fn examples() {
        let e = FactorEffort::default();
        let one = factor(&BigUint::one(), &e).unwrap();
        assert!(one.factors().is_empty() && one.is_complete());
        let f = factor(&BigUint::from(1_220_703_124u64), &e).unwrap();
        assert_eq!(f.factors(), &[(2u32.into(), 2), (305_175_781u32.into(), 1)]);
        let f = factor_qm_minus_1(5, 1, 15, None, &e).unwrap();
        assert_eq!(primes_of(&f), vec![2, 11, 31, 71, 181, 1741]);
        let f = factor_qm_minus_1(5, 1, 9, None, &e).unwrap();
        assert_eq!(f.factors(), &[(2u32.into(), 2), (19u32.into(), 1), (31u32.into(), 1), (829u32.into(), 1)]);
        let f = factor_qm_minus_1(2, 1, 2, None, &e).unwrap();
        assert_eq!(f.factors(), &[(3u32.into(), 1)]);
        assert!(factor_qm_minus_1(4, 1, 2, None, &e).is_err());
    }

    #[test]
    fn twenty_five_to_forty_eight() {
        let f = factor_qm_minus_1(5, 2, 48, None, &FactorEffort::default()).unwrap();
        assert!(f.is_complete());
        assert_eq!(f.value(), &(BigUint::from(5u32).pow(96) - 1u32));
        let phi96 = cyclotomic_value(96, &BigUint::from(5u32));
        assert_eq!(phi96, BigUint::from(5u32).pow(32) - BigUint::from(5u32).pow(16) + 1u32);
    }

    #[test]
    fn partial_when_budget_is_tiny() {
        let n = BigUint::from(1_000_003u64) * BigUint::from(1_000_033u64) * BigUint::from(999_983u64);
        let e = FactorEffort { rho_max_bits: 8, ..FactorEffort::default() };
        let f = factor(&n, &e).unwrap();
        assert_eq!(f.primes_u64().unwrap(), vec![999_983]);
        assert!(!f.is_complete());
        assert!(!is_probable_prime(f.cofactor()));
        assert!(f.recombines());
    }
}
