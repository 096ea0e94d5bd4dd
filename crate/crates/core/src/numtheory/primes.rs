//! Prime sieves, small-integer helpers and strong probable-prime tests.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::sync::OnceLock;

/// Odd-only bitset sieve: bit i stands for 2i+1.
pub struct PrimeSieve {
    limit: u64,
    bits: Vec<u64>,
}

impl PrimeSieve {
    pub fn new(limit: u64) -> Self {
        let n = (limit / 2 + 1) as usize;
        let mut bits = vec![!0u64; n.div_ceil(64)];
        // 1 is not prime
        bits[0] &= !1;
        let mut i = 1usize;
        loop {
            let p = 2 * i as u64 + 1;
            if p * p > limit {
                break;
            }
            if bits[i / 64] >> (i % 64) & 1 == 1 {
                let mut j = (p * p / 2) as usize;
                while j < n {
                    bits[j / 64] &= !(1 << (j % 64));
                    j += p as usize;
                }
            }
            i += 1;
        }
        PrimeSieve { limit, bits }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn contains(&self, n: u64) -> bool {
        if n == 2 {
            return true;
        }
        if n < 2 || n % 2 == 0 || n > self.limit {
            return false;
        }
        let i = (n / 2) as usize;
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    /// Primes in increasing order, up to the sieve limit.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        let two = if self.limit >= 2 { Some(2) } else { None };
        two.into_iter().chain(
            (1..=self.limit / 2)
                .map(|i| 2 * i + 1)
                .filter(move |&p| p <= self.limit && self.contains(p)),
        )
    }
}

pub const SMALL_PRIME_LIMIT: u64 = 1_000_000;

/// Shared sieve up to 10^6.
pub fn small_sieve() -> &'static PrimeSieve {
    static S: OnceLock<PrimeSieve> = OnceLock::new();
    S.get_or_init(|| PrimeSieve::new(SMALL_PRIME_LIMIT))
}

pub fn small_primes() -> &'static [u64] {
    static P: OnceLock<Vec<u64>> = OnceLock::new();
    P.get_or_init(|| small_sieve().iter().collect())
}

pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit <= SMALL_PRIME_LIMIT {
        small_primes().iter().copied().take_while(|&p| p <= limit).collect()
    } else {
        PrimeSieve::new(limit).iter().collect()
    }
}

#[inline]
pub fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn powmod(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    r
}

const MR_BASES: [u64; 20] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
];

fn strong_probable_prime_u64(n: u64, a: u64) -> bool {
    let a = a % n;
    if a == 0 {
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    let mut x = powmod(a, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mulmod(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

/// Deterministic for all u64 (first twelve prime bases).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES[..12] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    MR_BASES[..12].iter().all(|&a| strong_probable_prime_u64(n, a))
}

/// Strong probable-prime test with a fixed schedule of twenty prime bases.
/// Deterministic below 3.3e24; a probable-prime test beyond.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if let Some(v) = n.to_u64() {
        return is_prime_u64(v);
    }
    for &p in &small_primes()[..200] {
        if (n % p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    'bases: for &a in MR_BASES.iter() {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = &x * &x % n;
            if x == nm1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Remainder of a big integer by a small modulus without allocating.
pub fn rem_small(n: &BigUint, m: u64) -> u64 {
    let mut r: u128 = 0;
    for d in n.iter_u64_digits().rev() {
        r = ((r << 64) | d as u128) % m as u128;
    }
    r as u64
}

/// Factorization of a machine-size integer (trial division, then rho).
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n <= 1 {
        return out;
    }
    for &p in small_primes().iter().take(1000) {
        if p * p > n {
            break;
        }
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    if n > 1 {
        let mut stack = vec![n];
        let mut found: Vec<u64> = Vec::new();
        while let Some(c) = stack.pop() {
            if c == 1 {
                continue;
            }
            if is_prime_u64(c) {
                found.push(c);
                continue;
            }
            let f = super::rho::rho_u64(c, 1);
            stack.push(f);
            stack.push(c / f);
        }
        found.sort_unstable();
        for p in found {
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
        }
    }
    out.sort_unstable();
    out
}

pub fn divisors_u64(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factor_u64(n) {
        let len = ds.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                ds.push(ds[i] * pk);
            }
        }
    }
    ds.sort_unstable();
    ds
}

pub fn phi_u64(n: u64) -> u64 {
    factor_u64(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

pub fn mobius_u64(n: u64) -> i8 {
    let f = factor_u64(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Least e ≥ 1 with q^e ≡ 1 (mod n), for q already reduced or not.
pub fn mult_order_u64(q: u64, n: u64) -> Option<u64> {
    if n == 1 {
        return Some(1);
    }
    if q.gcd(&n) != 1 {
        return None;
    }
    let mut e = phi_u64(n);
    for (l, _) in factor_u64(e) {
        while e % l == 0 && powmod(q, e / l, n) == 1 {
            e /= l;
        }
    }
    Some(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_counts() {
        assert_eq!(primes_up_to(100).len(), 25);
        assert_eq!(small_primes().len(), 78498);
        assert_eq!(PrimeSieve::new(3_200_000).iter().count(), 230_209);
    }

    #[test]
    fn mr_agrees_with_sieve() {
        let s = small_sieve();
        for n in 0..200_000u64 {
            assert_eq!(is_prime_u64(n), s.contains(n), "{n}");
        }
        // strong pseudoprimes to several bases
        assert!(!is_prime_u64(3_215_031_751));
        assert!(!is_prime_u64(3_825_123_056_546_413_051));
        assert!(is_prime_u64(18_446_744_073_709_551_557));
    }

    #[test]
    fn big_probable_prime() {
        let m127 = (BigUint::one() << 127u32) - 1u32;
        assert!(is_probable_prime(&m127));
        let m128 = (BigUint::one() << 128u32) + 1u32;
        assert!(!is_probable_prime(&m128));
    }

    #[test]
    fn small_helpers() {
        assert_eq!(factor_u64(1_220_703_124), vec![(2, 2), (305_175_781, 1)]);
        assert_eq!(divisors_u64(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(phi_u64(24), 8);
        assert_eq!(mobius_u64(30), -1);
        assert_eq!(mult_order_u64(5, 13), Some(4));
        assert_eq!(mult_order_u64(5, 16), Some(4));
        assert_eq!(mult_order_u64(5, 10), None);
        assert_eq!(rem_small(&BigUint::from(10u32).pow(30), 7), 1_000_000_000_000_000_000_000_000_000_000u128.rem_euclid(7) as u64);
    }
}
