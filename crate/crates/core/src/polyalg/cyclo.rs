//! Factorization of x^m − 1 over F_q from q-cyclotomic cosets modulo m′.

use super::Poly;
use crate::error::{Error, Result};
use crate::ffield::{BaseField, ContextOptions, Field, FieldContext};
use crate::numtheory::mult_order_u64;
use crate::numtheory::primes::rem_small;
use num_bigint::BigUint;

#[derive(Clone, Debug)]
pub struct CycloFactorization {
    pub p: u64,
    pub k: u32,
    pub m: u64,
    /// m with every factor p removed.
    pub m_prime: u64,
    /// p-adic valuation of m.
    pub j: u32,
    /// Common multiplicity p^j of every factor.
    pub multiplicity: u64,
    /// Cosets ordered by least representative.
    pub cosets: Vec<Vec<u64>>,
    /// Explicit monic factors, one per coset, when they were built.
    pub factors: Option<Vec<Poly<BaseField>>>,
}

impl CycloFactorization {
    /// Number of distinct irreducible factors M′.
    pub fn distinct_count(&self) -> usize {
        self.cosets.len()
    }
    pub fn coset_degrees(&self) -> Vec<usize> {
        self.cosets.iter().map(|c| c.len()).collect()
    }
    /// ord_{m′}(q), the degree of the splitting field of x^{m′} − 1.
    pub fn order(&self) -> usize {
        self.cosets.iter().map(|c| c.len()).max().unwrap_or(1)
    }
}

/// Orbits of multiplication by q on Z/m′Z, ordered by least element.
pub fn cyclotomic_cosets(q_mod: u64, m_prime: u64) -> Vec<Vec<u64>> {
    let n = m_prime as usize;
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut c = Vec::new();
        let mut t = s as u64;
        while !seen[t as usize] {
            seen[t as usize] = true;
            c.push(t);
            t = (t as u128 * q_mod as u128 % m_prime as u128) as u64;
        }
        out.push(c);
    }
    out
}

fn split_m(p: u64, m: u64) -> (u64, u32) {
    let (mut mp, mut j) = (m, 0);
    while mp % p == 0 {
        mp /= p;
        j += 1;
    }
    (mp, j)
}

/// Coset structure only, for any q = p^k (no field tables needed).
pub fn cyclotomic_structure(p: u64, k: u32, m: u64) -> Result<CycloFactorization> {
    if m == 0 {
        return Err(Error::input("m must be positive"));
    }
    let (m_prime, j) = split_m(p, m);
    let q = BigUint::from(p).pow(k);
    let cosets = cyclotomic_cosets(rem_small(&q, m_prime), m_prime);
    Ok(CycloFactorization {
        p,
        k,
        m,
        m_prime,
        j,
        multiplicity: p.pow(j),
        cosets,
        factors: None,
    })
}

/// Cosets plus explicit factors Π_{s∈C}(x − ζ^s) when q^e ≤ `explicit_limit`.
pub fn cyclotomic_factorization(base: &BaseField, m: u64, explicit_limit: u64) -> Result<CycloFactorization> {
    let mut cf = cyclotomic_structure(base.p() as u64, base.k(), m)?;
    let q = base.q() as u64;
    let e = mult_order_u64(q % cf.m_prime, cf.m_prime).expect("m' is coprime to q") as u32;
    let size = (q as f64).powi(e as i32);
    if size > explicit_limit as f64 {
        return Ok(cf);
    }
    let opts = ContextOptions::default();
    let split = FieldContext::new(base.clone(), e, 0, &opts)?;
    let g = split
        .generator()
        .ok_or_else(|| Error::Integrity("splitting field has no generator".into()))?
        .clone();
    let zeta = split.pow(&g, &((split.size() - 1u32) / cf.m_prime));
    let mut factors = Vec::with_capacity(cf.cosets.len());
    for c in &cf.cosets {
        let mut prod = Poly::one(split.clone());
        for &s in c {
            let root = split.pow(&zeta, &BigUint::from(s));
            prod = prod.mul(&Poly::new(split.clone(), vec![split.neg(&root), split.one()]));
        }
        let coeffs = prod
            .coeffs()
            .iter()
            .map(|c| split.as_base(c))
            .collect::<Option<Vec<u32>>>()
            .ok_or_else(|| Error::Integrity("coset product has coefficients outside F_q".into()))?;
        factors.push(Poly::new(base.clone(), coeffs));
    }
    let prod = factors.iter().fold(Poly::one(base.clone()), |a, f| a.mul(f));
    if prod != Poly::x_pow_minus_one(base.clone(), cf.m_prime as usize) {
        return Err(Error::Integrity(format!("coset factors do not recombine to x^{}-1", cf.m_prime)));
    }
    cf.factors = Some(factors);
    Ok(cf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::factor_poly;

    #[test]
    fn examples() {
        let c = cyclotomic_structure(5, 1, 13).unwrap();
        let mut d = c.coset_degrees();
        d.sort();
        assert_eq!(d, vec![1, 4, 4, 4]);
        assert_eq!(c.distinct_count(), 4);
        let base = BaseField::new(5, 1, 0).unwrap();
        let c = cyclotomic_factorization(&base, 15, 1 << 20).unwrap();
        assert_eq!((c.m_prime, c.j, c.multiplicity), (3, 1, 5));
        let fs: Vec<String> = c.factors.unwrap().iter().map(|f| f.to_string()).collect();
        assert_eq!(fs, vec!["x + 4", "x^2 + x + 1"]);
        let c = cyclotomic_structure(7, 1, 1).unwrap();
        assert_eq!(c.distinct_count(), 1);
    }

    #[test]
    fn matches_full_factorization() {
        for (p, k, m) in [(5u64, 1u32, 12u64), (5, 2, 13), (2, 1, 21), (3, 2, 16), (5, 1, 20)] {
            let base = BaseField::new(p, k, 0).unwrap();
            let c = cyclotomic_factorization(&base, m, 1 << 22).unwrap();
            let full = factor_poly(&Poly::x_pow_minus_one(base.clone(), m as usize)).unwrap();
            assert_eq!(full.len(), c.distinct_count());
            assert!(full.iter().all(|(_, e)| *e as u64 == c.multiplicity));
            let mut mine = c.factors.unwrap();
            mine.sort();
            let theirs: Vec<_> = full.into_iter().map(|(f, _)| f).collect();
            assert_eq!(mine, theirs);
        }
    }
}
