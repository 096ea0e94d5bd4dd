//! Brute-force ground truth on small fields: freeness predicates, trace-constrained
//! pair counts, exact character sums and numeric checks of the Weil-type bounds.

mod bounds;
mod chars;
mod count;

pub use bounds::{castro_sum_check, weil_sum_check, SumCheck, SumStatus};
pub use chars::{CharValue, CharacterSystem, MultChar};
pub use count::{count_pairs, count_pairs_table, verify_witness, PairCountResult, PairCountTable, WitnessCheck};

use crate::error::{Error, Result};
use crate::ffield::{build_dlog, BaseField, DlogTable, Field, FieldContext, FieldElement, DEFAULT_DLOG_LIMIT};
use crate::numtheory::IntFactorization;
use crate::polyalg::{cyclotomic_factorization, CycloFactorization, Poly};
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

/// Default cap on q^m for exhaustive scans.
pub const DEFAULT_SCAN_LIMIT: u64 = 1 << 24;

/// F_{q^m} with per-element tables for exhaustive scans.
pub struct ScanField {
    ctx: FieldContext,
    dlog: DlogTable,
    qm1: IntFactorization,
    primes: Vec<u64>,
    cyclo: CycloFactorization,
    factors: Vec<Poly<BaseField>>,
    /// Bit i: primes[i] divides the discrete log (x is an ℓ-th power). All ones at 0.
    emask: Vec<u32>,
    /// Bit i: cofactors[i]∘x = 0 (x lies in the image of factors[i]).
    gmask: Vec<u32>,
    trace: Vec<u32>,
}

impl ScanField {
    pub fn new(ctx: &FieldContext, limit: u64) -> Result<Self> {
        let size = ctx
            .order_u64()
            .filter(|&s| s <= limit)
            .ok_or_else(|| Error::resource("exhaustive scan", ctx.size(), limit))?;
        let qm1 = ctx
            .qm_factorization()
            .cloned()
            .ok_or_else(|| Error::input("context was built without factoring q^m - 1"))?;
        qm1.require_complete()?;
        let primes = qm1.primes_u64().ok_or_else(|| Error::input("prime of q^m - 1 exceeds 64 bits"))?;
        if primes.len() > 32 {
            return Err(Error::resource("prime mask width", primes.len(), 32));
        }
        let dlog = build_dlog(ctx, limit.min(DEFAULT_DLOG_LIMIT))?;
        let m = ctx.m() as u64;
        let cyclo = cyclotomic_factorization(ctx.base(), m, u64::MAX)?;
        let factors = cyclo
            .factors
            .clone()
            .ok_or_else(|| Error::Integrity("explicit factors of x^m - 1 missing".into()))?;
        if factors.len() > 32 {
            return Err(Error::resource("factor mask width", factors.len(), 32));
        }
        let xm1 = Poly::x_pow_minus_one(ctx.base().clone(), m as usize);
        let cofactors = factors
            .iter()
            .map(|h| xm1.div_exact(h))
            .collect::<Result<Vec<_>>>()?;
        let n = size as usize;
        let emask: Vec<u32> = (0..n)
            .into_par_iter()
            .map(|i| match dlog.log_index(i as u64) {
                None => u32::MAX,
                Some(l) => primes
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| l as u64 % p == 0)
                    .fold(0, |acc, (b, _)| acc | 1 << b),
            })
            .collect();
        // images of the power basis under each cofactor action (F_q-linear maps)
        let base = ctx.base();
        let mut basis_images = Vec::new();
        for c in &cofactors {
            let mut cols = Vec::new();
            for j in 0..m as usize {
                let mut e = vec![0u32; m as usize];
                e[j] = 1;
                cols.push(ctx.module_action(c, &ctx.from_coeffs(&e)?)?);
            }
            basis_images.push(cols);
        }
        let gmask: Vec<u32> = (0..n)
            .into_par_iter()
            .map(|i| {
                let x = ctx.from_index(i as u64);
                let mut mask = 0u32;
                for (b, cols) in basis_images.iter().enumerate() {
                    let mut acc = vec![0u32; m as usize];
                    for (j, &xj) in x.coeffs().iter().enumerate() {
                        if xj == 0 {
                            continue;
                        }
                        for (t, &c) in cols[j].coeffs().iter().enumerate() {
                            if c != 0 {
                                acc[t] = base.add(&acc[t], &base.mul(&xj, &c));
                            }
                        }
                    }
                    if acc.iter().all(|&a| a == 0) {
                        mask |= 1 << b;
                    }
                }
                mask
            })
            .collect();
        let trace: Vec<u32> = (0..n).into_par_iter().map(|i| ctx.trace(&ctx.from_index(i as u64))).collect();
        Ok(ScanField {
            ctx: ctx.clone(),
            dlog,
            qm1,
            primes,
            cyclo,
            factors,
            emask,
            gmask,
            trace,
        })
    }

    pub fn context(&self) -> &FieldContext {
        &self.ctx
    }
    pub fn dlog(&self) -> &DlogTable {
        &self.dlog
    }
    pub fn qm1(&self) -> &IntFactorization {
        &self.qm1
    }
    /// Primes of q^m − 1, ascending.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }
    pub fn cyclo(&self) -> &CycloFactorization {
        &self.cyclo
    }
    /// Distinct monic irreducible factors of x^m − 1.
    pub fn factors(&self) -> &[Poly<BaseField>] {
        &self.factors
    }
    pub fn size(&self) -> u64 {
        self.emask.len() as u64
    }
    pub fn group_order(&self) -> u64 {
        self.size() - 1
    }
    pub fn index(&self, x: &FieldElement) -> u64 {
        self.ctx.index(x)
    }
    pub fn element(&self, i: u64) -> FieldElement {
        self.ctx.from_index(i)
    }
    pub fn trace_index(&self, i: u64) -> u32 {
        self.trace[i as usize]
    }

    /// Table-based e-freeness of the element with index i (false at 0).
    pub fn is_e_free_index(&self, i: u64, spec: &FreenessSpec) -> bool {
        i != 0 && self.emask[i as usize] & spec.e_bits == 0
    }
    pub fn is_g_free_index(&self, i: u64, spec: &FreenessSpec) -> bool {
        self.gmask[i as usize] & spec.g_bits == 0
    }
}

/// A divisor e of q^m − 1 (by its primes) and a divisor g of x^m − 1 (by its distinct
/// irreducible factors); freeness only depends on these radicals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FreenessSpec {
    pub e_primes: Vec<u64>,
    pub g_factors: Vec<usize>,
    #[serde(skip)]
    e_bits: u32,
    #[serde(skip)]
    g_bits: u32,
}

impl FreenessSpec {
    /// e = 1, g = 1.
    pub fn trivial() -> Self {
        FreenessSpec { e_primes: Vec::new(), g_factors: Vec::new(), e_bits: 0, g_bits: 0 }
    }

    /// e = q^m − 1, g = x^m − 1 (primitive and normal).
    pub fn full(field: &ScanField) -> Self {
        let e = (0..field.primes.len()).fold(0u32, |a, b| a | 1 << b);
        let g = (0..field.factors.len()).fold(0u32, |a, b| a | 1 << b);
        FreenessSpec {
            e_primes: field.primes.clone(),
            g_factors: (0..field.factors.len()).collect(),
            e_bits: e,
            g_bits: g,
        }
    }

    /// From an integer e | q^m − 1 and a factor subset.
    pub fn new(field: &ScanField, e: u64, g_factors: &[usize]) -> Result<Self> {
        if e == 0 || field.group_order() % e != 0 {
            return Err(Error::input(format!("{e} does not divide q^m - 1")));
        }
        let mut bits = 0u32;
        let mut e_primes = Vec::new();
        for (b, &p) in field.primes.iter().enumerate() {
            if e % p == 0 {
                bits |= 1 << b;
                e_primes.push(p);
            }
        }
        let mut g_bits = 0u32;
        for &i in g_factors {
            if i >= field.factors.len() {
                return Err(Error::input(format!("factor index {i} out of range")));
            }
            g_bits |= 1 << i;
        }
        let g_factors = (0..field.factors.len()).filter(|i| g_bits >> i & 1 == 1).collect();
        Ok(FreenessSpec { e_primes, g_factors, e_bits: bits, g_bits })
    }

    /// g given as a polynomial dividing x^m − 1.
    pub fn with_poly(field: &ScanField, e: u64, g: &Poly<BaseField>) -> Result<Self> {
        let xm1 = Poly::x_pow_minus_one(field.ctx.base().clone(), field.ctx.m() as usize);
        if g.is_zero() || !g.divides(&xm1)? {
            return Err(Error::input(format!("{g} does not divide x^m - 1")));
        }
        let idx: Vec<usize> = field
            .factors
            .iter()
            .enumerate()
            .filter(|(_, h)| h.divides(g).unwrap_or(false))
            .map(|(i, _)| i)
            .collect();
        Self::new(field, e, &idx)
    }

    /// Radical of e as an integer.
    pub fn e_radical(&self) -> u64 {
        self.e_primes.iter().product()
    }
}

/// x^{(q^m−1)/ℓ} ≠ 1 for every prime ℓ of e.
pub fn is_e_free(ctx: &FieldContext, x: &FieldElement, e_primes: &[u64]) -> Result<bool> {
    if ctx.is_zero(x) {
        return Err(Error::input("freeness is undefined at 0"));
    }
    let order = ctx.size() - 1u32;
    for &l in e_primes {
        if (&order % l) != BigUint::from(0u32) {
            return Err(Error::input(format!("{l} does not divide q^m - 1")));
        }
        if ctx.is_one(&ctx.pow(x, &(&order / l))) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn is_primitive(ctx: &FieldContext, x: &FieldElement) -> Result<bool> {
    let f = ctx
        .qm_factorization()
        .ok_or_else(|| Error::input("context was built without factoring q^m - 1"))?;
    f.require_complete()?;
    let primes = f.primes_u64().ok_or_else(|| Error::input("prime of q^m - 1 exceeds 64 bits"))?;
    is_e_free(ctx, x, &primes)
}

/// ((x^m − 1)/h)∘x ≠ 0 for every h in `factors` (distinct irreducible divisors of x^m − 1).
pub fn is_g_free(ctx: &FieldContext, x: &FieldElement, factors: &[Poly<BaseField>]) -> Result<bool> {
    let xm1 = Poly::x_pow_minus_one(ctx.base().clone(), ctx.m() as usize);
    for h in factors {
        let c = xm1.div_exact(h)?;
        if ctx.is_zero(&ctx.module_action(&c, x)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn is_normal(ctx: &FieldContext, x: &FieldElement) -> Result<bool> {
    let cf = cyclotomic_factorization(ctx.base(), ctx.m() as u64, u64::MAX)?;
    is_g_free(ctx, x, cf.factors.as_deref().unwrap_or(&[]))
}

/// Normality by the rank of the conjugates x, x^q, …, x^{q^{m−1}} over F_q.
pub fn is_normal_by_rank(ctx: &FieldContext, x: &FieldElement) -> bool {
    let m = ctx.m() as usize;
    let b = ctx.base();
    let mut rows: Vec<Vec<u32>> = (0..m as u64).map(|i| ctx.frobenius(x, i).coeffs().to_vec()).collect();
    let mut rank = 0;
    for col in 0..m {
        let Some(piv) = (rank..m).find(|&r| rows[r][col] != 0) else { continue };
        rows.swap(rank, piv);
        let inv = b.inv(&rows[rank][col]).unwrap();
        let pivot: Vec<u32> = rows[rank].iter().map(|a| b.mul(a, &inv)).collect();
        for r in 0..m {
            if r != rank && rows[r][col] != 0 {
                let f = rows[r][col];
                for c in 0..m {
                    rows[r][c] = b.sub(&rows[r][c], &b.mul(&f, &pivot[c]));
                }
            }
        }
        rows[rank] = pivot;
        rank += 1;
    }
    rank == m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::make_context;

    #[test]
    fn f4_counts() {
        let ctx = make_context(2, 1, 2, 0).unwrap();
        let sf = ScanField::new(&ctx, DEFAULT_SCAN_LIMIT).unwrap();
        let full = FreenessSpec::full(&sf);
        let prim = (0..4).filter(|&i| sf.is_e_free_index(i, &full)).count();
        let norm = (0..4).filter(|&i| sf.is_g_free_index(i, &full)).count();
        assert_eq!((prim, norm), (2, 2));
        assert!(!is_normal(&ctx, &ctx.one()).unwrap());
        assert!(is_normal_by_rank(&ctx, &ctx.x()));
        assert!(!is_primitive(&ctx, &ctx.one()).unwrap());
        assert!(is_e_free(&ctx, &ctx.zero(), &[3]).is_err());
    }

    #[test]
    fn tables_match_predicates() {
        let ctx = make_context(5, 1, 3, 1).unwrap();
        let sf = ScanField::new(&ctx, DEFAULT_SCAN_LIMIT).unwrap();
        let full = FreenessSpec::full(&sf);
        for i in 1..sf.size() {
            let x = sf.element(i);
            assert_eq!(sf.is_e_free_index(i, &full), is_primitive(&ctx, &x).unwrap());
            assert_eq!(sf.is_g_free_index(i, &full), is_normal(&ctx, &x).unwrap());
            assert_eq!(is_normal(&ctx, &x).unwrap(), is_normal_by_rank(&ctx, &x));
        }
        let prim = (1..sf.size()).filter(|&i| sf.is_e_free_index(i, &full)).count();
        assert_eq!(prim, 60); // φ(124)
    }
}
