use crate::error::{Error, Result};
use crate::numtheory::primes::rem_small;
use crate::polyalg::cyclotomic_structure;
use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use serde::Serialize;

/// m = m′·p^j and the factor-count statistics of x^{m′} − 1 over F_q.
#[derive(Clone, Debug, Serialize)]
pub struct MDecomposition {
    pub p: u64,
    pub k: u32,
    pub m: u64,
    pub m_prime: u64,
    pub j: u32,
    /// gcd(q − 1, m′).
    pub m_bar: u64,
    /// ord_{m′}(q).
    pub order_e: u64,
    /// Number of distinct irreducible factors of x^{m′} − 1.
    pub big_m_prime: u64,
    /// Factors of degree below e; W(g) for the Lemma-style g is 2 to this power.
    pub small_factor_count: u64,
    #[serde(serialize_with = "ser_ratio")]
    pub delta_exact: BigRational,
    /// small_factor_count / m′.
    #[serde(serialize_with = "ser_ratio")]
    pub delta_sieve: BigRational,
    /// Bound from the published case table (only for m′ > 4).
    #[serde(serialize_with = "ser_opt_ratio")]
    pub delta_lemma: Option<BigRational>,
    /// "2m_bar", "4m_bar", "6m_bar" or "otherwise".
    pub lemma_case: Option<&'static str>,
    /// delta_exact exceeds delta_lemma.
    pub exact_exceeds_lemma: bool,
    /// delta_sieve exceeds delta_lemma.
    pub sieve_exceeds_lemma: bool,
    /// m′ divides q² − 1.
    pub divides_q2_minus_1: bool,
    /// m′ divides q − 1 (x^{m′} − 1 splits into linear factors).
    pub divides_q_minus_1: bool,
}

fn ser_ratio<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn ser_opt_ratio<S: serde::Serializer>(r: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

fn ratio(a: u64, b: u64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

pub fn delta_compute(p: u64, k: u32, m: u64) -> Result<MDecomposition> {
    if m == 0 {
        return Err(Error::input("m must be positive"));
    }
    let cf = cyclotomic_structure(p, k, m)?;
    let mp = cf.m_prime;
    let q = BigUint::from(p).pow(k);
    let q_mod = rem_small(&q, mp);
    let qm1_mod = (q_mod + mp - 1) % mp;
    let m_bar = if mp == 1 { 1 } else { mp.gcd(&qm1_mod) };
    let e = cf.order() as u64;
    let big_m = cf.distinct_count() as u64;
    let small = cf.cosets.iter().filter(|c| (c.len() as u64) < e).count() as u64;
    let q2m1_mod = ((q_mod as u128 * q_mod as u128 + mp as u128 - 1) % mp as u128) as u64;
    let delta_exact = ratio(big_m, mp);
    let delta_sieve = ratio(small, mp);
    let (delta_lemma, lemma_case) = if mp > 4 {
        if mp == 2 * m_bar {
            (Some(ratio(1, 2)), Some("2m_bar"))
        } else if mp == 4 * m_bar {
            (Some(ratio(3, 8)), Some("4m_bar"))
        } else if mp == 6 * m_bar {
            (Some(ratio(13, 36)), Some("6m_bar"))
        } else {
            (Some(ratio(1, 3)), Some("otherwise"))
        }
    } else {
        (None, None)
    };
    let exact_exceeds_lemma = delta_lemma.as_ref().is_some_and(|l| delta_exact > *l);
    let sieve_exceeds_lemma = delta_lemma.as_ref().is_some_and(|l| delta_sieve > *l);
    Ok(MDecomposition {
        p,
        k,
        m,
        m_prime: mp,
        j: cf.j,
        m_bar,
        order_e: e,
        big_m_prime: big_m,
        small_factor_count: small,
        delta_exact,
        delta_sieve,
        delta_lemma,
        lemma_case,
        exact_exceeds_lemma,
        sieve_exceeds_lemma,
        divides_q2_minus_1: q2m1_mod == 0,
        divides_q_minus_1: qm1_mod == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_sixteen() {
        let d = delta_compute(5, 1, 16).unwrap();
        assert_eq!((d.big_m_prime, d.order_e, d.m_bar), (8, 4, 4));
        assert_eq!(d.delta_exact, ratio(1, 2));
        assert_eq!(d.delta_lemma, Some(ratio(3, 8)));
        assert_eq!(d.delta_sieve, ratio(3, 8));
        assert!(d.exact_exceeds_lemma && !d.sieve_exceeds_lemma);
        assert!(!d.divides_q2_minus_1);
    }

    #[test]
    fn five_thirteen_and_trivial() {
        let d = delta_compute(5, 1, 13).unwrap();
        assert_eq!(d.big_m_prime, 4);
        assert_eq!(d.delta_exact, ratio(4, 13));
        assert_eq!(d.delta_sieve, ratio(1, 13));
        let d = delta_compute(5, 2, 125).unwrap();
        assert_eq!((d.m_prime, d.j, d.big_m_prime), (1, 3, 1));
        assert_eq!(d.delta_exact, ratio(1, 1));
        assert!(d.divides_q_minus_1);
        let d = delta_compute(5, 1, 15).unwrap();
        assert_eq!((d.m_prime, d.j, d.big_m_prime), (3, 1, 2));
        assert!(d.divides_q2_minus_1 && !d.divides_q_minus_1);
    }
}
