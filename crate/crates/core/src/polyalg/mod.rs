//! Dense univariate polynomials over any [`Field`] level.

mod cyclo;
mod factor;
mod stats;

pub use cyclo::{cyclotomic_cosets, cyclotomic_factorization, cyclotomic_structure, CycloFactorization};
pub use factor::{factor_poly, factor_poly_seeded, squarefree_decomposition};
pub use stats::{divisor_stats, PolyDivisorStats};

use crate::error::{Error, Result};
use crate::ffield::Field;
use num_bigint::BigUint;
use std::cmp::Ordering;
use std::fmt;

const KARATSUBA_CUTOFF: usize = 32;

/// Coefficients lowest degree first, no trailing zeros.
#[derive(Clone)]
pub struct Poly<F: Field> {
    field: F,
    coeffs: Vec<F::Elem>,
}

impl<F: Field> PartialEq for Poly<F> {
    fn eq(&self, other: &Self) -> bool {
        self.field.id() == other.field.id() && self.coeffs == other.coeffs
    }
}
impl<F: Field> Eq for Poly<F> {}

impl<F: Field> PartialOrd for Poly<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Degree first, then coefficients from the top.
impl<F: Field> Ord for Poly<F> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.coeffs
            .len()
            .cmp(&other.coeffs.len())
            .then_with(|| self.coeffs.iter().rev().cmp(other.coeffs.iter().rev()))
    }
}

impl<F: Field> fmt::Debug for Poly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<F: Field> fmt::Display for Poly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let one = self.field.one();
        let mut first = true;
        for (d, c) in self.coeffs.iter().enumerate().rev() {
            if self.field.is_zero(c) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let cs = self.field.format_elem(c);
            match d {
                0 => write!(f, "{cs}")?,
                _ => {
                    if *c != one {
                        write!(f, "{cs}*")?;
                    }
                    write!(f, "x")?;
                    if d > 1 {
                        write!(f, "^{d}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl<F: Field> Poly<F> {
    pub fn new(field: F, mut coeffs: Vec<F::Elem>) -> Self {
        while coeffs.last().is_some_and(|c| field.is_zero(c)) {
            coeffs.pop();
        }
        Poly { field, coeffs }
    }
    pub fn zero(field: F) -> Self {
        Poly { field, coeffs: Vec::new() }
    }
    pub fn one(field: F) -> Self {
        let c = field.one();
        Poly::new(field, vec![c])
    }
    pub fn constant(field: F, c: F::Elem) -> Self {
        Poly::new(field, vec![c])
    }
    pub fn x(field: F) -> Self {
        Self::monomial(field.clone(), field.one(), 1)
    }
    pub fn monomial(field: F, c: F::Elem, d: usize) -> Self {
        let mut v = vec![field.zero(); d + 1];
        v[d] = c;
        Poly::new(field, v)
    }
    /// x^n − 1.
    pub fn x_pow_minus_one(field: F, n: usize) -> Self {
        let mut v = vec![field.zero(); n + 1];
        v[n] = field.one();
        v[0] = field.sub(&v[0], &field.one());
        Poly::new(field, v)
    }

    pub fn field(&self) -> &F {
        &self.field
    }
    pub fn coeffs(&self) -> &[F::Elem] {
        &self.coeffs
    }
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }
    /// Degree with the zero polynomial counted as 0.
    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.field.is_one(&self.coeffs[0])
    }
    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }
    pub fn lc(&self) -> Option<&F::Elem> {
        self.coeffs.last()
    }
    pub fn coeff(&self, i: usize) -> F::Elem {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }
    pub fn is_monic(&self) -> bool {
        self.lc().is_some_and(|c| self.field.is_one(c))
    }

    pub fn same_level(&self, other: &Self) -> Result<()> {
        if self.field.id() == other.field.id() {
            Ok(())
        } else {
            Err(Error::LevelMismatch(format!("{:?} vs {:?}", self.field.id(), other.field.id())))
        }
    }

    fn assert_level(&self, other: &Self) {
        if let Err(e) = self.same_level(other) {
            panic!("{e}");
        }
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        let v = self.coeffs.iter().map(|a| self.field.mul(a, c)).collect();
        Poly::new(self.field.clone(), v)
    }

    pub fn monic(&self) -> Self {
        match self.lc() {
            None => self.clone(),
            Some(c) => self.scale(&self.field.inv(c).expect("nonzero leading coefficient")),
        }
    }

    pub fn neg(&self) -> Self {
        let v = self.coeffs.iter().map(|a| self.field.neg(a)).collect();
        Poly::new(self.field.clone(), v)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_level(other);
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let v = (0..n)
            .map(|i| match (self.coeffs.get(i), other.coeffs.get(i)) {
                (Some(a), Some(b)) => f.add(a, b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        Poly::new(f.clone(), v)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.assert_level(other);
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.field.clone());
        }
        let v = mul_slices(&self.field, &self.coeffs, &other.coeffs);
        Poly::new(self.field.clone(), v)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut r = Poly::one(self.field.clone());
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        r
    }

    pub fn divrem(&self, d: &Self) -> Result<(Self, Self)> {
        self.same_level(d)?;
        let dl = d.lc().ok_or(Error::DivisionByZero)?;
        let f = &self.field;
        let inv = f.inv(dl)?;
        let dn = d.coeffs.len();
        if self.coeffs.len() < dn {
            return Ok((Poly::zero(f.clone()), self.clone()));
        }
        let mut r = self.coeffs.clone();
        let mut q = vec![f.zero(); r.len() - dn + 1];
        for i in (0..q.len()).rev() {
            let c = f.mul(&r[i + dn - 1], &inv);
            if f.is_zero(&c) {
                continue;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[i + j] = f.sub(&r[i + j], &f.mul(&c, dc));
            }
            q[i] = c;
        }
        r.truncate(dn - 1);
        Ok((Poly::new(f.clone(), q), Poly::new(f.clone(), r)))
    }

    pub fn rem(&self, d: &Self) -> Result<Self> {
        Ok(self.divrem(d)?.1)
    }

    /// Quotient, checked to be exact.
    pub fn div_exact(&self, d: &Self) -> Result<Self> {
        let (q, r) = self.divrem(d)?;
        if !r.is_zero() {
            return Err(Error::input(format!("{d} does not divide {self}")));
        }
        Ok(q)
    }

    pub fn divides(&self, other: &Self) -> Result<bool> {
        Ok(other.rem(self)?.is_zero())
    }

    /// Monic gcd; panics on mixed levels (use [`gcd_poly`] for a checked version).
    pub fn gcd(&self, other: &Self) -> Self {
        self.assert_level(other);
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// (g, s, t) with s·self + t·other = g monic.
    pub fn xgcd(&self, other: &Self) -> (Self, Self, Self) {
        self.assert_level(other);
        let f = self.field.clone();
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (Poly::one(f.clone()), Poly::zero(f.clone()));
        let (mut t0, mut t1) = (Poly::zero(f.clone()), Poly::one(f.clone()));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1).expect("nonzero divisor");
            r0 = std::mem::replace(&mut r1, r);
            let s2 = s0.sub(&q.mul(&s1));
            s0 = std::mem::replace(&mut s1, s2);
            let t2 = t0.sub(&q.mul(&t1));
            t0 = std::mem::replace(&mut t1, t2);
        }
        match r0.lc() {
            None => (r0, s0, t0),
            Some(c) => {
                let inv = f.inv(c).unwrap();
                (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
            }
        }
    }

    /// self^e mod m.
    pub fn powmod(&self, e: &BigUint, m: &Self) -> Result<Self> {
        let mut r = Poly::one(self.field.clone()).rem(m)?;
        let b = self.rem(m)?;
        for i in (0..e.bits()).rev() {
            r = r.mul(&r).rem(m)?;
            if e.bit(i) {
                r = r.mul(&b).rem(m)?;
            }
        }
        Ok(r)
    }

    pub fn derivative(&self) -> Self {
        let f = &self.field;
        let v = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| f.mul(c, &f.from_int(i as i64)))
            .collect();
        Poly::new(f.clone(), v)
    }

    pub fn eval(&self, x: &F::Elem) -> F::Elem {
        let f = &self.field;
        self.coeffs
            .iter()
            .rev()
            .fold(f.zero(), |acc, c| f.add(&f.mul(&acc, x), c))
    }

    /// g with g^p = self, assuming only exponents divisible by p occur.
    pub fn pth_root(&self) -> Self {
        let p = self.field.characteristic() as usize;
        let v = self.coeffs.iter().step_by(p).map(|c| self.field.pth_root(c)).collect();
        Poly::new(self.field.clone(), v)
    }

    /// Applies a coefficient map into another level.
    pub fn map<G: Field>(&self, target: G, f: impl Fn(&F::Elem) -> G::Elem) -> Poly<G> {
        let v = self.coeffs.iter().map(f).collect();
        Poly::new(target, v)
    }

    /// Parses "c_d*x^d + … + c_0".
    pub fn parse(field: F, s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse { pos: 0, msg: "empty polynomial".into() });
        }
        let b = s.as_bytes();
        let mut terms: Vec<(bool, usize, usize)> = Vec::new();
        let mut depth = 0i32;
        let mut start = 0usize;
        let mut neg = false;
        for (i, &ch) in b.iter().enumerate() {
            match ch {
                b'[' | b'(' => depth += 1,
                b']' | b')' => depth -= 1,
                b'+' | b'-' if depth == 0 => {
                    let prev_star = i > 0 && (b[i - 1] == b'*' || b[i - 1] == b'^');
                    if prev_star {
                        continue;
                    }
                    if i > start {
                        terms.push((neg, start, i));
                    } else if i > 0 {
                        return Err(Error::Parse { pos: i, msg: "empty term".into() });
                    }
                    neg = ch == b'-';
                    start = i + 1;
                }
                _ => {}
            }
        }
        if depth != 0 {
            return Err(Error::Parse { pos: s.len(), msg: "unbalanced brackets".into() });
        }
        if start >= s.len() {
            return Err(Error::Parse { pos: s.len(), msg: "dangling sign".into() });
        }
        terms.push((neg, start, s.len()));
        let mut acc = Poly::zero(field.clone());
        for (neg, a, z) in terms {
            let t = &s[a..z];
            let (coef, deg) = parse_term(&field, t).map_err(|e| match e {
                Error::Parse { pos, msg } => Error::Parse { pos: pos + a, msg },
                other => other,
            })?;
            let c = if neg { field.neg(&coef) } else { coef };
            acc = acc.add(&Poly::monomial(field.clone(), c, deg));
        }
        Ok(acc)
    }
}

fn parse_term<F: Field>(field: &F, t: &str) -> Result<(F::Elem, usize)> {
    let b = t.as_bytes();
    let mut depth = 0;
    let mut xpos = None;
    for (i, &ch) in b.iter().enumerate() {
        match ch {
            b'[' => depth += 1,
            b']' => depth -= 1,
            b'x' if depth == 0 => {
                xpos = Some(i);
                break;
            }
            _ => {}
        }
    }
    match xpos {
        None => Ok((field.parse_elem(t)?, 0)),
        Some(i) => {
            let cpart = t[..i].strip_suffix('*').unwrap_or(&t[..i]);
            let coef = if cpart.is_empty() { field.one() } else { field.parse_elem(cpart)? };
            let rest = &t[i + 1..];
            let deg = if rest.is_empty() {
                1
            } else {
                let e = rest
                    .strip_prefix('^')
                    .ok_or_else(|| Error::Parse { pos: i + 1, msg: "expected '^' after x".into() })?;
                e.parse::<usize>()
                    .map_err(|_| Error::Parse { pos: i + 2, msg: format!("bad exponent '{e}'") })?
            };
            Ok((coef, deg))
        }
    }
}

/// Checked monic gcd.
pub fn gcd_poly<F: Field>(a: &Poly<F>, b: &Poly<F>) -> Result<Poly<F>> {
    a.same_level(b)?;
    Ok(a.gcd(b))
}

fn mul_slices<F: Field>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    if a.len() < KARATSUBA_CUTOFF || b.len() < KARATSUBA_CUTOFF {
        let mut out = vec![f.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if f.is_zero(x) {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                out[i + j] = f.add(&out[i + j], &f.mul(x, y));
            }
        }
        return out;
    }
    let h = a.len().max(b.len()) / 2;
    let (a0, a1) = a.split_at(h.min(a.len()));
    let (b0, b1) = b.split_at(h.min(b.len()));
    let z0 = mul_slices(f, a0, b0);
    let z2 = mul_slices(f, a1, b1);
    let sum = |x: &[F::Elem], y: &[F::Elem]| -> Vec<F::Elem> {
        (0..x.len().max(y.len()))
            .map(|i| match (x.get(i), y.get(i)) {
                (Some(u), Some(v)) => f.add(u, v),
                (Some(u), None) | (None, Some(u)) => u.clone(),
                _ => unreachable!(),
            })
            .collect()
    };
    let z1 = mul_slices(f, &sum(a0, a1), &sum(b0, b1));
    let mut out = vec![f.zero(); a.len() + b.len() - 1];
    for (i, c) in z0.iter().enumerate() {
        out[i] = f.add(&out[i], c);
    }
    for (i, c) in z2.iter().enumerate() {
        out[i + 2 * h] = f.add(&out[i + 2 * h], c);
    }
    for (i, c) in z1.iter().enumerate() {
        let mid = f.sub(c, &f.add(z0.get(i).unwrap_or(&f.zero()), z2.get(i).unwrap_or(&f.zero())));
        if i + h < out.len() {
            out[i + h] = f.add(&out[i + h], &mid);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::{make_context, BaseField, PrimeField};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f5() -> PrimeField {
        PrimeField::new(5).unwrap()
    }

    #[test]
    fn gcd_and_irreducible() {
        let a = Poly::parse(f5(), "x^2 - 1").unwrap();
        let b = Poly::parse(f5(), "x - 1").unwrap();
        assert_eq!(gcd_poly(&a, &b).unwrap(), b);
        assert!(Poly::parse(f5(), "x^2+x+1").unwrap().is_irreducible());
        assert!(!Poly::parse(f5(), "x^2+1").unwrap().is_irreducible());
        let other = Poly::x(BaseField::new(5, 2, 0).unwrap());
        let c = Poly::x(BaseField::new(5, 1, 0).unwrap());
        assert!(matches!(gcd_poly(&other, &other.clone()), Ok(_)));
        assert!(matches!(c.same_level(&Poly::x(BaseField::new(5, 2, 0).unwrap())), Err(Error::LevelMismatch(_))));
    }

    #[test]
    fn text_round_trip() {
        let f = Poly::parse(f5(), "3*x^4 - x + 2").unwrap();
        assert_eq!(f.to_string(), "3*x^4 + 4*x + 2");
        assert_eq!(Poly::parse(f5(), &f.to_string()).unwrap(), f);
        let ctx = make_context(5, 2, 3, 1).unwrap();
        let g = Poly::parse(ctx.clone(), "[[1,2],0,[3,0]]*x^2 + [1,4]*x + 1").unwrap();
        assert_eq!(Poly::parse(ctx.clone(), &g.to_string()).unwrap(), g);
        assert!(Poly::parse(f5(), "x^").is_err());
        assert!(Poly::parse(f5(), "3*y").is_err());
        assert!(Poly::parse(f5(), "x +").is_err());
    }

    #[test]
    fn karatsuba_matches_schoolbook() {
        let f = BaseField::new(5, 2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a: Vec<u32> = (0..90).map(|_| f.random(&mut rng)).collect();
        let b: Vec<u32> = (0..70).map(|_| f.random(&mut rng)).collect();
        let fast = mul_slices(&f, &a, &b);
        let mut slow = vec![0u32; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                slow[i + j] = f.add(&slow[i + j], &f.mul(x, y));
            }
        }
        assert_eq!(fast, slow);
    }

    #[test]
    fn division_identity() {
        let f = BaseField::new(3, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let a = Poly::new(f.clone(), (0..12).map(|_| f.random(&mut rng)).collect());
            let d = Poly::new(f.clone(), (0..5).map(|_| f.random(&mut rng)).collect());
            if d.is_zero() {
                continue;
            }
            let (q, r) = a.divrem(&d).unwrap();
            assert_eq!(q.mul(&d).add(&r), a);
            assert!(r.is_zero() || r.deg() < d.deg());
            let (g, s, t) = a.xgcd(&d);
            assert_eq!(s.mul(&a).add(&t.mul(&d)), g);
        }
        assert!(matches!(Poly::x(f.clone()).divrem(&Poly::zero(f)), Err(Error::DivisionByZero)));
    }
}
