//! Rational functions f = lead·f1/f2 over F_{q^m} in simplest form and the
//! membership test for the class R^n of admissible functions.

use crate::error::{Error, Result};
use crate::ffield::{Field, FieldContext, FieldElement};
use crate::numtheory::IntFactorization;
use crate::polyalg::{factor_poly, Poly};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFunction {
    f1: Poly<FieldContext>,
    f2: Poly<FieldContext>,
    lead: FieldElement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Evaluation {
    Value(FieldElement),
    Pole,
}

/// Cancels gcd(num, den) and normalizes both sides to monic.
pub fn reduce(num: &Poly<FieldContext>, den: &Poly<FieldContext>) -> Result<RationalFunction> {
    num.same_level(den)?;
    if den.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let ctx = num.field().clone();
    if num.is_zero() {
        return Ok(RationalFunction {
            f1: Poly::zero(ctx.clone()),
            f2: Poly::one(ctx.clone()),
            lead: ctx.zero(),
        });
    }
    let g = num.gcd(den);
    let a = num.div_exact(&g)?;
    let b = den.div_exact(&g)?;
    let lead = ctx.mul(a.lc().unwrap(), &ctx.inv(b.lc().unwrap())?);
    Ok(RationalFunction { f1: a.monic(), f2: b.monic(), lead })
}

impl RationalFunction {
    /// Parses "(NUM)/(DEN)" or a bare polynomial.
    pub fn parse(ctx: &FieldContext, s: &str) -> Result<Self> {
        let t = s.trim();
        match split_quotient(t) {
            Some((n, d)) => reduce(&Poly::parse(ctx.clone(), n)?, &Poly::parse(ctx.clone(), d)?),
            None => reduce(&Poly::parse(ctx.clone(), strip_parens(t))?, &Poly::one(ctx.clone())),
        }
    }

    pub fn numerator(&self) -> &Poly<FieldContext> {
        &self.f1
    }
    pub fn denominator(&self) -> &Poly<FieldContext> {
        &self.f2
    }
    pub fn lead(&self) -> &FieldElement {
        &self.lead
    }
    pub fn context(&self) -> &FieldContext {
        self.f1.field()
    }
    pub fn n1(&self) -> usize {
        self.f1.deg()
    }
    pub fn n2(&self) -> usize {
        self.f2.deg()
    }
    /// Degree sum n1 + n2.
    pub fn n(&self) -> usize {
        self.n1() + self.n2()
    }

    pub fn evaluate(&self, x: &FieldElement) -> Evaluation {
        let ctx = self.context();
        let d = self.f2.eval(x);
        if ctx.is_zero(&d) {
            return Evaluation::Pole;
        }
        let n = ctx.mul(&self.f1.eval(x), &self.lead);
        Evaluation::Value(ctx.mul(&n, &ctx.inv(&d).unwrap()))
    }

    /// Zeros and poles in F_{q^m}, together with 0, sorted and deduplicated.
    pub fn excluded_set(&self) -> Result<Vec<FieldElement>> {
        let ctx = self.context();
        let mut s = vec![ctx.zero()];
        for side in [&self.f1, &self.f2] {
            if side.deg() == 0 {
                continue;
            }
            for (g, _) in factor_poly(side)? {
                if g.deg() == 1 {
                    s.push(ctx.neg(&g.coeffs()[0]));
                }
            }
        }
        s.sort();
        s.dedup();
        Ok(s)
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = self.f1.scale(&self.lead);
        write!(f, "({num})/({})", self.f2)
    }
}

fn strip_parens(s: &str) -> &str {
    let t = s.trim();
    if t.starts_with('(') && t.ends_with(')') && matching_close(t, 0) == Some(t.len() - 1) {
        &t[1..t.len() - 1]
    } else {
        t
    }
}

fn matching_close(s: &str, open: usize) -> Option<usize> {
    let mut depth = 0;
    for (i, ch) in s.bytes().enumerate().skip(open) {
        match ch {
            b'(' => depth += 1,
            b')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

fn split_quotient(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0;
    for (i, ch) in s.bytes().enumerate() {
        match ch {
            b'(' | b'[' => depth += 1,
            b')' | b']' => depth -= 1,
            b'/' if depth == 0 => return Some((strip_parens(&s[..i]), strip_parens(&s[i + 1..]))),
            _ => {}
        }
    }
    None
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipEvidence {
    pub in_rn: bool,
    /// gcd of the multiplicities of the irreducible factors of f1·f2 other than x.
    pub d0: u64,
    pub condition_i: bool,
    /// Smallest prime of gcd(d0, q^m − 1) when condition (i) fails.
    pub witness_d: Option<String>,
    pub condition_ii: bool,
    /// First denominator factor and multiplicity satisfying condition (ii).
    pub witness_g: Option<(String, usize)>,
    /// Condition (ii) with "p ∤ r" in place of "q^m ∤ r".
    pub condition_ii_strict: bool,
    pub in_rn_strict: bool,
    pub excluded_set_size: usize,
}

pub fn check_membership(f: &RationalFunction, qm_minus_1: &IntFactorization) -> Result<MembershipEvidence> {
    qm_minus_1.require_complete()?;
    let ctx = f.context();
    if f.lead == ctx.zero() {
        return Err(Error::input("the zero function has no membership"));
    }
    let x = Poly::x(ctx.clone());
    let num = if f.f1.deg() > 0 { factor_poly(&f.f1)? } else { vec![] };
    let den = if f.f2.deg() > 0 { factor_poly(&f.f2)? } else { vec![] };
    let d0 = num
        .iter()
        .chain(den.iter())
        .filter(|(g, _)| *g != x)
        .fold(0u64, |acc, (_, e)| acc.gcd(&(*e as u64)));
    let n = qm_minus_1.value();
    let (condition_i, witness_d) = if d0 == 0 {
        let w = qm_minus_1.primes().next().cloned();
        (w.is_none() && n.is_one(), w.map(|p| p.to_string()))
    } else {
        let g = BigUint::from(d0).gcd(n);
        if g.is_one() {
            (true, None)
        } else {
            let w = qm_minus_1.primes().find(|p| (&g % *p).is_zero()).unwrap();
            (false, Some(w.to_string()))
        }
    };
    let qm = ctx.size();
    let p = ctx.p() as usize;
    let witness_g = den
        .iter()
        .find(|(_, r)| !(BigUint::from(*r) % &qm).is_zero())
        .map(|(g, r)| (g.to_string(), *r));
    let condition_ii = witness_g.is_some();
    let condition_ii_strict = den.iter().any(|(_, r)| r % p != 0);
    Ok(MembershipEvidence {
        in_rn: condition_i && condition_ii,
        d0,
        condition_i,
        witness_d,
        condition_ii,
        witness_g,
        condition_ii_strict,
        in_rn_strict: condition_i && condition_ii_strict,
        excluded_set_size: f.excluded_set()?.len(),
    })
}
