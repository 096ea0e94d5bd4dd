use super::text::{parse_nested, Nested};
use super::{fingerprint, BaseField, Field, FieldId};
use crate::error::{Error, Result};
use crate::numtheory::{FactorEffort, FactorTable, Factorizer, IntFactorization};
use crate::polyalg::Poly;
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smallvec::SmallVec;
use std::sync::Arc;

/// Coordinates a_0..a_{m−1} over F_q (as F_q indices) of Σ a_i x^i.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement(pub(crate) SmallVec<[u32; 16]>);

impl FieldElement {
    pub fn coeffs(&self) -> &[u32] {
        &self.0
    }
}

#[derive(Clone, Debug)]
pub struct ContextOptions {
    /// Factor q^m − 1 and search for a certified generator.
    pub find_generator: bool,
    pub effort: FactorEffort,
    pub table: Option<Arc<FactorTable>>,
}

impl Default for ContextOptions {
    fn default() -> Self {
        ContextOptions { find_generator: true, effort: FactorEffort::default(), table: None }
    }
}

/// F_{q^m} = F_q[x]/(h).
#[derive(Clone)]
pub struct FieldContext(Arc<Inner>);

struct Inner {
    base: BaseField,
    m: u32,
    modulus: Vec<u32>,
    seed: u64,
    /// Column j is (x^j)^q.
    frob: Vec<FieldElement>,
    /// Tr(x^i) ∈ F_q.
    trace_of_basis: Vec<u32>,
    size: BigUint,
    qm_factorization: Option<IntFactorization>,
    generator: Option<FieldElement>,
    id: FieldId,
}

impl std::fmt::Debug for FieldContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "F_({:?})^{} mod {:?}", self.0.base, self.0.m, self.0.modulus)
    }
}

/// Context for F_{(p^k)^m}, deterministic in `seed`.
pub fn make_context(p: u64, k: u32, m: u32, seed: u64) -> Result<FieldContext> {
    let base = BaseField::new(p, k, seed)?;
    FieldContext::new(base, m, seed, &ContextOptions::default())
}

impl FieldContext {
    pub fn new(base: BaseField, m: u32, seed: u64, opts: &ContextOptions) -> Result<Self> {
        if m == 0 {
            return Err(Error::input("m must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x70b_f1e1d ^ ((m as u64) << 40));
        let q = base.q();
        let modulus: Vec<u32> = if m == 1 {
            vec![0, 1]
        } else {
            loop {
                let mut c: Vec<u32> = (0..m).map(|_| rng.gen_range(0..q)).collect();
                c.push(1);
                if Poly::new(base.clone(), c.clone()).is_irreducible() {
                    break c;
                }
            }
        };
        let size = BigUint::from(q).pow(m);
        let mut words = vec![base.id().fingerprint, m as u64];
        words.extend(modulus.iter().map(|&c| c as u64));
        let id = FieldId { p: base.p() as u64, k: base.k(), m, fingerprint: fingerprint(&words) };
        let mut ctx = FieldContext(Arc::new(Inner {
            base,
            m,
            modulus,
            seed,
            frob: Vec::new(),
            trace_of_basis: Vec::new(),
            size,
            qm_factorization: None,
            generator: None,
            id,
        }));
        // Frobenius columns
        let xq = ctx.pow(&ctx.x(), &BigUint::from(q));
        let mut cols = Vec::with_capacity(m as usize);
        let mut c = ctx.one();
        for _ in 0..m {
            cols.push(c.clone());
            c = ctx.mul(&c, &xq);
        }
        Arc::get_mut(&mut ctx.0).unwrap().frob = cols;
        let mut tb = Vec::with_capacity(m as usize);
        let mut xi = ctx.one();
        for _ in 0..m {
            tb.push(ctx.trace_to_base(&xi)?);
            xi = ctx.mul(&xi, &ctx.x());
        }
        Arc::get_mut(&mut ctx.0).unwrap().trace_of_basis = tb;
        if opts.find_generator {
            let fz = Factorizer::new(opts.effort.clone(), opts.table.clone());
            let f = fz.factor_qm_minus_1(ctx.p() as u64, ctx.k() as u64, m as u64)?;
            let gen = if f.is_complete() { Some(ctx.search_generator(&f, &mut rng)) } else { None };
            let inner = Arc::get_mut(&mut ctx.0).unwrap();
            inner.generator = gen;
            inner.qm_factorization = Some(f);
        }
        Ok(ctx)
    }

    fn search_generator(&self, f: &IntFactorization, rng: &mut ChaCha8Rng) -> FieldElement {
        let order = &self.0.size - 1u32;
        let cofactors: Vec<BigUint> = f.primes().map(|l| &order / l).collect();
        loop {
            let c = self.random(rng);
            if self.is_zero(&c) {
                continue;
            }
            if cofactors.iter().all(|e| !self.is_one(&self.pow(&c, e))) {
                return c;
            }
        }
    }

    pub fn base(&self) -> &BaseField {
        &self.0.base
    }
    pub fn p(&self) -> u32 {
        self.0.base.p()
    }
    pub fn k(&self) -> u32 {
        self.0.base.k()
    }
    pub fn q(&self) -> u32 {
        self.0.base.q()
    }
    pub fn m(&self) -> u32 {
        self.0.m
    }
    pub fn seed(&self) -> u64 {
        self.0.seed
    }
    /// Top modulus over F_q, lowest degree first.
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }
    pub fn generator(&self) -> Option<&FieldElement> {
        self.0.generator.as_ref()
    }
    pub fn qm_factorization(&self) -> Option<&IntFactorization> {
        self.0.qm_factorization.as_ref()
    }
    /// q^m as u64 when it fits.
    pub fn order_u64(&self) -> Option<u64> {
        u64::try_from(&self.0.size).ok()
    }

    pub fn x(&self) -> FieldElement {
        if self.0.m == 1 {
            // x ≡ 0 modulo the degree-one modulus x
            return self.zero();
        }
        let mut v = SmallVec::from_elem(0, self.0.m as usize);
        v[1] = 1;
        FieldElement(v)
    }

    pub fn embed(&self, c: u32) -> FieldElement {
        let mut v = SmallVec::from_elem(0, self.0.m as usize);
        v[0] = c;
        FieldElement(v)
    }

    pub fn from_coeffs(&self, c: &[u32]) -> Result<FieldElement> {
        if c.len() != self.0.m as usize || c.iter().any(|&a| a >= self.q()) {
            return Err(Error::input("coefficient vector does not fit the field"));
        }
        Ok(FieldElement(SmallVec::from_slice(c)))
    }

    /// Constant coefficient if x lies in F_q.
    pub fn as_base(&self, x: &FieldElement) -> Option<u32> {
        x.0[1..].iter().all(|&c| c == 0).then_some(x.0[0])
    }

    pub fn scale(&self, c: u32, x: &FieldElement) -> FieldElement {
        let b = &self.0.base;
        FieldElement(x.0.iter().map(|a| b.mul(&c, a)).collect())
    }

    /// x^{q^i}.
    pub fn frobenius(&self, x: &FieldElement, i: u64) -> FieldElement {
        let mut y = x.clone();
        for _ in 0..(i % self.0.m as u64) {
            y = self.frob_once(&y);
        }
        y
    }

    fn frob_once(&self, x: &FieldElement) -> FieldElement {
        let b = &self.0.base;
        let mut acc: SmallVec<[u32; 16]> = SmallVec::from_elem(0, self.0.m as usize);
        for (j, &a) in x.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (t, &c) in self.0.frob[j].0.iter().enumerate() {
                if c != 0 {
                    acc[t] = b.add(&acc[t], &b.mul(&a, &c));
                }
            }
        }
        FieldElement(acc)
    }

    /// Σ_{i<m} x^{q^i}, checked to land in F_q.
    pub fn trace_to_base(&self, x: &FieldElement) -> Result<u32> {
        let mut acc = x.clone();
        let mut y = x.clone();
        for _ in 1..self.0.m {
            y = self.frob_once(&y);
            acc = self.add(&acc, &y);
        }
        self.as_base(&acc)
            .ok_or_else(|| Error::Integrity("trace has coordinates outside F_q".into()))
    }

    /// Trace via the precomputed traces of the power basis.
    pub fn trace(&self, x: &FieldElement) -> u32 {
        let b = &self.0.base;
        x.0.iter()
            .zip(&self.0.trace_of_basis)
            .fold(0, |acc, (a, t)| b.add(&acc, &b.mul(a, t)))
    }

    /// Tr_{F_{q^m}/F_p}(x) as a residue mod p.
    pub fn absolute_trace(&self, x: &FieldElement) -> u32 {
        self.0.base.abs_trace(self.trace(x))
    }

    /// f∘x = Σ a_i x^{q^i} for f = Σ a_i X^i over F_q.
    pub fn module_action(&self, f: &Poly<BaseField>, x: &FieldElement) -> Result<FieldElement> {
        if f.field().id() != self.0.base.id() {
            return Err(Error::LevelMismatch("module action needs a polynomial over the base field".into()));
        }
        let mut acc = self.zero();
        let mut y = x.clone();
        for (i, c) in f.coeffs().iter().enumerate() {
            if i > 0 {
                y = self.frob_once(&y);
            }
            if *c != 0 {
                acc = self.add(&acc, &self.scale(*c, &y));
            }
        }
        Ok(acc)
    }

    /// Σ a_i q^i.
    pub fn index(&self, x: &FieldElement) -> u64 {
        let q = self.q() as u64;
        x.0.iter().rev().fold(0, |acc, &c| acc * q + c as u64)
    }

    pub fn from_index(&self, mut idx: u64) -> FieldElement {
        let q = self.q() as u64;
        FieldElement(
            (0..self.0.m)
                .map(|_| {
                    let c = (idx % q) as u32;
                    idx /= q;
                    c
                })
                .collect(),
        )
    }

    /// F_p coordinates (length km), F_q coordinate j contributing digits jk..jk+k.
    pub fn fp_coords(&self, x: &FieldElement) -> Vec<u32> {
        x.0.iter().flat_map(|&c| self.0.base.digits(c)).collect()
    }

    pub fn from_fp_coords(&self, v: &[u32]) -> FieldElement {
        let k = self.k() as usize;
        FieldElement(v.chunks(k).map(|d| self.0.base.from_digits(d)).collect())
    }

    pub fn describe(&self) -> serde_json::Value {
        let b = &self.0.base;
        serde_json::json!({
            "p": self.p(),
            "k": self.k(),
            "m": self.m(),
            "base_modulus": b.modulus().iter().rev().collect::<Vec<_>>(),
            "top_modulus": self.0.modulus.iter().rev().map(|&c| b.format_elem(&c)).collect::<Vec<_>>(),
            "seed": self.0.seed,
            "generator": self.generator().map(|g| self.format_elem(g)),
        })
    }

    fn inv_poly(&self, a: &FieldElement) -> Result<FieldElement> {
        // extended Euclid on (h, a) over F_q
        let b = &self.0.base;
        let trim = |v: &mut Vec<u32>| {
            while v.last() == Some(&0) {
                v.pop();
            }
        };
        let mut r0: Vec<u32> = self.0.modulus.clone();
        let mut r1: Vec<u32> = a.0.to_vec();
        trim(&mut r1);
        if r1.is_empty() {
            return Err(Error::DivisionByZero);
        }
        let mut s0: Vec<u32> = vec![];
        let mut s1: Vec<u32> = vec![1];
        while !r1.is_empty() {
            let inv_lc = b.inv(r1.last().unwrap())?;
            let mut quo = vec![0u32; r0.len().saturating_sub(r1.len()) + 1];
            while r0.len() >= r1.len() && !r0.is_empty() {
                let sh = r0.len() - r1.len();
                let c = b.mul(r0.last().unwrap(), &inv_lc);
                quo[sh] = c;
                for (i, &v) in r1.iter().enumerate() {
                    r0[i + sh] = b.sub(&r0[i + sh], &b.mul(&c, &v));
                }
                trim(&mut r0);
            }
            // s_new = s0 − quo·s1
            let mut s2 = vec![0u32; quo.len() + s1.len()];
            for (i, &x) in quo.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (j, &y) in s1.iter().enumerate() {
                    s2[i + j] = b.add(&s2[i + j], &b.mul(&x, &y));
                }
            }
            let len = s2.len().max(s0.len());
            let mut s_new = vec![0u32; len];
            for i in 0..len {
                let a0 = s0.get(i).copied().unwrap_or(0);
                let a2 = s2.get(i).copied().unwrap_or(0);
                s_new[i] = b.sub(&a0, &a2);
            }
            trim(&mut s_new);
            std::mem::swap(&mut r0, &mut r1);
            s0 = std::mem::replace(&mut s1, s_new);
        }
        // r0 is a nonzero constant; s0·a ≡ r0
        if r0.len() != 1 {
            return Err(Error::Integrity("top modulus is not irreducible".into()));
        }
        let c = b.inv(&r0[0])?;
        let mut out: SmallVec<[u32; 16]> = SmallVec::from_elem(0, self.0.m as usize);
        for (i, &v) in s0.iter().enumerate() {
            out[i] = b.mul(&v, &c);
        }
        Ok(FieldElement(out))
    }

    fn elem_from_nested(&self, v: &Nested) -> Result<FieldElement> {
        let b = &self.0.base;
        let m = self.0.m as usize;
        match v {
            Nested::Int(n) => Ok(self.embed(b.from_int(*n))),
            Nested::List(items) if m == 1 => Ok(self.embed(b.elem_from_nested(&Nested::List(items.clone()))?)),
            Nested::List(items) => {
                if items.len() > m || items.is_empty() {
                    return Err(Error::Parse { pos: 0, msg: format!("element needs at most {m} coordinates") });
                }
                let mut c: SmallVec<[u32; 16]> = SmallVec::from_elem(0, m);
                for (i, it) in items.iter().rev().enumerate() {
                    c[i] = b.elem_from_nested(it)?;
                }
                Ok(FieldElement(c))
            }
        }
    }
}

impl Field for FieldContext {
    type Elem = FieldElement;

    fn id(&self) -> FieldId {
        self.0.id
    }
    fn characteristic(&self) -> u64 {
        self.p() as u64
    }
    fn size(&self) -> BigUint {
        self.0.size.clone()
    }
    fn zero(&self) -> FieldElement {
        FieldElement(SmallVec::from_elem(0, self.0.m as usize))
    }
    fn one(&self) -> FieldElement {
        self.embed(1)
    }
    fn is_zero(&self, a: &FieldElement) -> bool {
        a.0.iter().all(|&c| c == 0)
    }
    fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let f = &self.0.base;
        FieldElement(a.0.iter().zip(&b.0).map(|(x, y)| f.add(x, y)).collect())
    }
    fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let f = &self.0.base;
        FieldElement(a.0.iter().zip(&b.0).map(|(x, y)| f.sub(x, y)).collect())
    }
    fn neg(&self, a: &FieldElement) -> FieldElement {
        let f = &self.0.base;
        FieldElement(a.0.iter().map(|x| f.neg(x)).collect())
    }
    fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let f = &self.0.base;
        let m = self.0.m as usize;
        if m == 1 {
            return FieldElement(SmallVec::from_elem(f.mul(&a.0[0], &b.0[0]), 1));
        }
        let mut prod: SmallVec<[u32; 32]> = SmallVec::from_elem(0, 2 * m - 1);
        for (i, x) in a.0.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.0.iter().enumerate() {
                if *y != 0 {
                    prod[i + j] = f.add(&prod[i + j], &f.mul(x, y));
                }
            }
        }
        let h = &self.0.modulus;
        for d in (m..2 * m - 1).rev() {
            let c = prod[d];
            if c != 0 {
                for t in 0..m {
                    if h[t] != 0 {
                        prod[d - m + t] = f.sub(&prod[d - m + t], &f.mul(&c, &h[t]));
                    }
                }
            }
        }
        FieldElement(SmallVec::from_slice(&prod[..m]))
    }
    fn inv(&self, a: &FieldElement) -> Result<FieldElement> {
        if self.0.m == 1 {
            return Ok(self.embed(self.0.base.inv(&a.0[0])?));
        }
        self.inv_poly(a)
    }
    fn pth_root(&self, a: &FieldElement) -> FieldElement {
        let e = &self.0.size / self.p();
        self.pow(a, &e)
    }
    fn from_int(&self, n: i64) -> FieldElement {
        self.embed(self.0.base.from_int(n))
    }
    fn random(&self, rng: &mut ChaCha8Rng) -> FieldElement {
        FieldElement((0..self.0.m).map(|_| rng.gen_range(0..self.q())).collect())
    }
    fn format_elem(&self, a: &FieldElement) -> String {
        let b = &self.0.base;
        if self.0.m == 1 {
            return b.format_elem(&a.0[0]);
        }
        let parts: Vec<String> = a.0.iter().rev().map(|c| b.format_elem(c)).collect();
        format!("[{}]", parts.join(","))
    }
    fn parse_elem(&self, s: &str) -> Result<FieldElement> {
        self.elem_from_nested(&parse_nested(s)?)
    }
    fn is_one(&self, a: &FieldElement) -> bool {
        a.0[0] == 1 && a.0[1..].iter().all(|&c| c == 0)
    }
}
