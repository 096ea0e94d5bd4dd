use super::text::{parse_nested, Nested};
use super::{fingerprint, Field, FieldId, PrimeField};
use crate::error::{Error, Result};
use crate::numtheory::{factor_u64, primes::powmod};
use crate::polyalg::Poly;
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Largest F_q served by the log/exp tables.
pub const MAX_BASE_SIZE: u64 = 1 << 20;
const ADD_TABLE_MAX: u32 = 1024;

/// F_q = F_p[y]/(g). Elements are indices Σ c_j p^j of their coordinate vectors.
#[derive(Clone)]
pub struct BaseField(Arc<Inner>);

struct Inner {
    p: u32,
    k: u32,
    q: u32,
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    add: Option<Vec<u32>>,
    neg: Vec<u32>,
    abs_trace: Vec<u32>,
    id: FieldId,
}

impl std::fmt::Debug for BaseField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "F_{}^{} mod {:?}", self.0.p, self.0.k, self.0.modulus)
    }
}

fn digits(mut a: u32, p: u32, k: u32) -> Vec<u32> {
    (0..k)
        .map(|_| {
            let d = a % p;
            a /= p;
            d
        })
        .collect()
}

fn undigits(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Product of two coordinate vectors modulo the monic modulus, over F_p.
fn slow_mul(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let k = modulus.len() - 1;
    let p64 = p as u64;
    let mut prod = vec![0u64; 2 * k];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p64;
        }
    }
    for d in (k..2 * k).rev() {
        let c = prod[d];
        if c != 0 {
            for t in 0..k {
                prod[d - k + t] = (prod[d - k + t] + (p64 - c) * modulus[t] as u64) % p64;
            }
            prod[d] = 0;
        }
    }
    prod[..k].iter().map(|&v| v as u32).collect()
}

fn slow_pow(a: &[u32], mut e: u64, modulus: &[u32], p: u32) -> Vec<u32> {
    let k = modulus.len() - 1;
    let mut r = vec![0; k];
    r[0] = 1;
    let mut b = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            r = slow_mul(&r, &b, modulus, p);
        }
        b = slow_mul(&b, &b, modulus, p);
        e >>= 1;
    }
    r
}

impl BaseField {
    /// F_{p^k}; the modulus comes from a seeded random search when k > 1.
    pub fn new(p: u64, k: u32, seed: u64) -> Result<Self> {
        let fp = PrimeField::new(p)?;
        if k == 0 {
            return Err(Error::input("k must be positive"));
        }
        let q = (p as u128).pow(k);
        if q > MAX_BASE_SIZE as u128 {
            return Err(Error::resource("base field size", q, MAX_BASE_SIZE));
        }
        let (p, q) = (p as u32, q as u32);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xba5e_f1e1d);
        let modulus: Vec<u32> = if k == 1 {
            vec![0, 1]
        } else {
            loop {
                let mut c: Vec<u32> = (0..k).map(|_| rng.gen_range(0..p)).collect();
                c.push(1);
                if Poly::new(fp, c.clone()).is_irreducible() {
                    break c;
                }
            }
        };
        let order = q as u64 - 1;
        let ells: Vec<u64> = factor_u64(order).into_iter().map(|(l, _)| l).collect();
        let gen = loop {
            let cand: Vec<u32> = if k == 1 {
                vec![rng.gen_range(1..p)]
            } else {
                digits(rng.gen_range(1..q), p, k)
            };
            let one_v = digits(1, p, k);
            let ok = ells.iter().all(|&l| {
                if k == 1 {
                    powmod(cand[0] as u64, order / l, p as u64) != 1
                } else {
                    slow_pow(&cand, order / l, &modulus, p) != one_v
                }
            });
            if ok {
                break cand;
            }
        };
        let mut exp = vec![0u32; order as usize];
        let mut log = vec![u32::MAX; q as usize];
        let mut x = digits(1, p, k);
        for (e, slot) in exp.iter_mut().enumerate() {
            let idx = undigits(&x, p);
            if log[idx as usize] != u32::MAX {
                return Err(Error::Integrity("base field generator is not primitive".into()));
            }
            log[idx as usize] = e as u32;
            *slot = idx;
            x = if k == 1 {
                vec![((x[0] as u64 * gen[0] as u64) % p as u64) as u32]
            } else {
                slow_mul(&x, &gen, &modulus, p)
            };
        }
        let add_digits = |a: u32, b: u32| {
            let (da, db) = (digits(a, p, k), digits(b, p, k));
            let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
            undigits(&s, p)
        };
        let add = (q <= ADD_TABLE_MAX).then(|| {
            let mut t = vec![0u32; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    t[(a * q + b) as usize] = add_digits(a, b);
                }
            }
            t
        });
        let neg: Vec<u32> = (0..q)
            .map(|a| {
                let d: Vec<u32> = digits(a, p, k).iter().map(|&c| (p - c) % p).collect();
                undigits(&d, p)
            })
            .collect();
        let id = FieldId {
            p: p as u64,
            k,
            m: 1,
            fingerprint: fingerprint(&modulus.iter().map(|&c| c as u64).collect::<Vec<_>>()),
        };
        let mut bf = BaseField(Arc::new(Inner {
            p,
            k,
            q,
            modulus,
            exp,
            log,
            add,
            neg,
            abs_trace: Vec::new(),
            id,
        }));
        // absolute trace Σ_j c^{p^j}
        let mut tr = Vec::with_capacity(q as usize);
        for a in 0..q {
            let mut acc = 0u32;
            let mut y = a;
            for _ in 0..k {
                acc = bf.add(&acc, &y);
                y = bf.pow_u64(y, p as u64);
            }
            if acc >= p {
                return Err(Error::Integrity(format!("absolute trace of {a} left F_p")));
            }
            tr.push(acc);
        }
        Arc::get_mut(&mut bf.0).expect("fresh field").abs_trace = tr;
        Ok(bf)
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }
    pub fn k(&self) -> u32 {
        self.0.k
    }
    pub fn q(&self) -> u32 {
        self.0.q
    }
    /// Modulus coefficients, lowest degree first.
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }
    pub fn prime_field(&self) -> PrimeField {
        PrimeField::new(self.0.p as u64).unwrap()
    }
    pub fn generator(&self) -> u32 {
        if self.0.q == 2 {
            1
        } else {
            self.0.exp[1]
        }
    }
    pub fn digits(&self, a: u32) -> Vec<u32> {
        digits(a, self.0.p, self.0.k)
    }
    pub fn from_digits(&self, d: &[u32]) -> u32 {
        undigits(d, self.0.p)
    }
    /// Discrete log base `generator()`; None at 0.
    pub fn log(&self, a: u32) -> Option<u32> {
        let l = self.0.log[a as usize];
        (l != u32::MAX).then_some(l)
    }
    pub fn exp(&self, e: u64) -> u32 {
        self.0.exp[(e % (self.0.q as u64 - 1)) as usize]
    }
    /// Tr_{F_q/F_p}(a) as a residue mod p.
    pub fn abs_trace(&self, a: u32) -> u32 {
        self.0.abs_trace[a as usize]
    }
    pub fn pow_u64(&self, a: u32, e: u64) -> u32 {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let l = self.0.log[a as usize] as u64;
        self.exp(l * (e % (self.0.q as u64 - 1)))
    }
    pub fn coords_string(&self, a: u32) -> String {
        let d = self.digits(a);
        let parts: Vec<String> = d.iter().rev().map(|c| c.to_string()).collect();
        format!("[{}]", parts.join(","))
    }

    pub(crate) fn elem_from_nested(&self, v: &Nested) -> Result<u32> {
        match v {
            Nested::Int(n) => Ok(self.from_int(*n)),
            Nested::List(items) => {
                if items.len() > self.0.k as usize || items.is_empty() {
                    return Err(Error::Parse {
                        pos: 0,
                        msg: format!("F_q element needs at most {} coordinates", self.0.k),
                    });
                }
                let mut d = vec![0u32; self.0.k as usize];
                for (i, it) in items.iter().rev().enumerate() {
                    match it {
                        Nested::Int(n) => d[i] = n.rem_euclid(self.0.p as i64) as u32,
                        _ => return Err(Error::Parse { pos: 0, msg: "nested too deep".into() }),
                    }
                }
                Ok(self.from_digits(&d))
            }
        }
    }
}

impl Field for BaseField {
    type Elem = u32;

    fn id(&self) -> FieldId {
        self.0.id
    }
    fn characteristic(&self) -> u64 {
        self.0.p as u64
    }
    fn size(&self) -> BigUint {
        BigUint::from(self.0.q)
    }
    fn zero(&self) -> u32 {
        0
    }
    fn one(&self) -> u32 {
        1
    }
    fn is_zero(&self, a: &u32) -> bool {
        *a == 0
    }
    #[inline]
    fn add(&self, a: &u32, b: &u32) -> u32 {
        let inner = &*self.0;
        if inner.k == 1 {
            let s = a + b;
            return if s >= inner.p { s - inner.p } else { s };
        }
        if let Some(t) = &inner.add {
            return t[(a * inner.q + b) as usize];
        }
        let (mut x, mut y, mut r, mut pw) = (*a, *b, 0u32, 1u32);
        while x > 0 || y > 0 {
            r += ((x % inner.p + y % inner.p) % inner.p) * pw;
            x /= inner.p;
            y /= inner.p;
            pw *= inner.p;
        }
        r
    }
    fn sub(&self, a: &u32, b: &u32) -> u32 {
        self.add(a, &self.0.neg[*b as usize])
    }
    fn neg(&self, a: &u32) -> u32 {
        self.0.neg[*a as usize]
    }
    #[inline]
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        if *a == 0 || *b == 0 {
            return 0;
        }
        let inner = &*self.0;
        let s = inner.log[*a as usize] + inner.log[*b as usize];
        let n = inner.q - 1;
        inner.exp[if s >= n { s - n } else { s } as usize]
    }
    fn inv(&self, a: &u32) -> Result<u32> {
        if *a == 0 {
            return Err(Error::DivisionByZero);
        }
        let n = self.0.q - 1;
        let l = self.0.log[*a as usize];
        Ok(self.0.exp[((n - l) % n) as usize])
    }
    fn pth_root(&self, a: &u32) -> u32 {
        self.pow_u64(*a, self.0.q as u64 / self.0.p as u64)
    }
    fn from_int(&self, n: i64) -> u32 {
        n.rem_euclid(self.0.p as i64) as u32
    }
    fn random(&self, rng: &mut ChaCha8Rng) -> u32 {
        rng.gen_range(0..self.0.q)
    }
    fn format_elem(&self, a: &u32) -> String {
        if self.0.k == 1 {
            a.to_string()
        } else {
            self.coords_string(*a)
        }
    }
    fn parse_elem(&self, s: &str) -> Result<u32> {
        self.elem_from_nested(&parse_nested(s)?)
    }
    fn pow(&self, a: &u32, e: &BigUint) -> u32 {
        let n = self.0.q as u64 - 1;
        let r = (e % n).to_u64().unwrap();
        if *a == 0 {
            return if e.bits() == 0 { 1 } else { 0 };
        }
        self.pow_u64(*a, if r == 0 && e.bits() > 0 { n } else { r })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f4_and_f25() {
        let f4 = BaseField::new(2, 2, 1).unwrap();
        assert_eq!(f4.modulus(), &[1, 1, 1]);
        let w = 2; // y
        assert_eq!(f4.add(&f4.mul(&w, &w), &w), 1);
        let f25 = BaseField::new(5, 2, 9).unwrap();
        for a in 1..25 {
            assert_eq!(f25.mul(&a, &f25.inv(&a).unwrap()), 1);
            assert_eq!(f25.pow_u64(f25.pth_root(&a), 5), a);
        }
        for a in 0..25 {
            assert_eq!(f25.add(&a, &f25.neg(&a)), 0);
        }
        // trace to F_5 takes each value five times
        let mut counts = [0; 5];
        for a in 0..25 {
            counts[f25.abs_trace(a) as usize] += 1;
        }
        assert_eq!(counts, [5; 5]);
    }

    #[test]
    fn large_base_uses_digit_addition() {
        let f = BaseField::new(3, 7, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let (a, b, c) = (f.random(&mut rng), f.random(&mut rng), f.random(&mut rng));
            assert_eq!(f.mul(&a, &f.add(&b, &c)), f.add(&f.mul(&a, &b), &f.mul(&a, &c)));
        }
    }
}
