use super::{Field, FieldId};
use crate::error::{Error, Result};
use crate::numtheory::is_prime_u64;
use num_bigint::BigUint;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// F_p with elements stored as residues.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        if p > u32::MAX as u64 / 2 {
            return Err(Error::resource("prime field characteristic", p, u32::MAX / 2));
        }
        Ok(PrimeField { p: p as u32 })
    }

    pub fn p(&self) -> u32 {
        self.p
    }
}

impl Field for PrimeField {
    type Elem = u32;

    fn id(&self) -> FieldId {
        FieldId { p: self.p as u64, k: 1, m: 1, fingerprint: 0 }
    }
    fn characteristic(&self) -> u64 {
        self.p as u64
    }
    fn size(&self) -> BigUint {
        BigUint::from(self.p)
    }
    fn zero(&self) -> u32 {
        0
    }
    fn one(&self) -> u32 {
        1 % self.p
    }
    fn is_zero(&self, a: &u32) -> bool {
        *a == 0
    }
    fn add(&self, a: &u32, b: &u32) -> u32 {
        let s = a + b;
        if s >= self.p { s - self.p } else { s }
    }
    fn sub(&self, a: &u32, b: &u32) -> u32 {
        if a >= b { a - b } else { a + self.p - b }
    }
    fn neg(&self, a: &u32) -> u32 {
        if *a == 0 { 0 } else { self.p - a }
    }
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        ((*a as u64 * *b as u64) % self.p as u64) as u32
    }
    fn inv(&self, a: &u32) -> Result<u32> {
        if *a == 0 {
            return Err(Error::DivisionByZero);
        }
        let r = crate::numtheory::primes::powmod(*a as u64, self.p as u64 - 2, self.p as u64);
        Ok(r as u32)
    }
    fn pth_root(&self, a: &u32) -> u32 {
        *a
    }
    fn from_int(&self, n: i64) -> u32 {
        n.rem_euclid(self.p as i64) as u32
    }
    fn random(&self, rng: &mut ChaCha8Rng) -> u32 {
        rng.gen_range(0..self.p)
    }
    fn format_elem(&self, a: &u32) -> String {
        a.to_string()
    }
    fn parse_elem(&self, s: &str) -> Result<u32> {
        let n: i64 = s
            .trim()
            .parse()
            .map_err(|_| Error::Parse { pos: 0, msg: format!("expected an integer, got '{s}'") })?;
        Ok(self.from_int(n))
    }
}
