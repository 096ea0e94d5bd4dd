//! Exact character sums on small fields and the character-sum forms of the
//! e-free, g-free and trace indicator functions.

use super::{FreenessSpec, ScanField};
use crate::error::{Error, Result};
use crate::ffield::{Field, FieldElement};
use crate::numtheory::primes::mobius_u64;
use crate::numtheory::{divisors_u64, phi_u64};
use crate::polyalg::Poly;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

/// Residual above which a rounded character sum is rejected.
pub const CHAR_TOLERANCE: f64 = 1e-6;
const NONE: u32 = u32::MAX;

/// χ(γ^l) = ζ_d^{s·l} for the context generator γ; χ(0) = 0 unless d = 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MultChar {
    pub d: u64,
    pub s: u64,
}

impl MultChar {
    pub fn is_trivial(&self) -> bool {
        self.d == 1
    }
}

/// A real-valued character-sum result rounded to the nearest integer.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CharValue {
    pub value: i64,
    pub raw: f64,
    pub residual: f64,
}

impl CharValue {
    fn round(raw: Complex64) -> Result<Self> {
        let value = raw.re.round();
        let residual = (raw.re - value).abs().max(raw.im.abs());
        if residual >= CHAR_TOLERANCE || !residual.is_finite() {
            return Err(Error::Integrity(format!("character sum residual {residual:.3e}")));
        }
        Ok(CharValue { value: value as i64, raw: raw.re, residual })
    }
}

fn root(num: u64, den: u64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * (num % den) as f64 / den as f64)
}

pub struct CharacterSystem<'a> {
    field: &'a ScanField,
    abs_trace: Vec<u32>,
    /// Squarefree F_q-order of ψ_β as a factor mask, NONE if not squarefree.
    order_mask: Vec<u32>,
}

impl<'a> CharacterSystem<'a> {
    pub fn new(field: &'a ScanField) -> Result<Self> {
        let ctx = field.context();
        let base = ctx.base();
        let n = field.size();
        let abs_trace: Vec<u32> = (0..n).map(|i| base.abs_trace(field.trace_index(i))).collect();
        let km = (ctx.k() * ctx.m()) as usize;
        let fp_basis: Vec<FieldElement> = (0..km)
            .map(|j| {
                let mut v = vec![0u32; km];
                v[j] = 1;
                ctx.from_fp_coords(&v)
            })
            .collect();
        let r = field.factors().len();
        let radical = field.factors().iter().fold(Poly::one(base.clone()), |a, h| a.mul(h));
        let mut tests = vec![radical.clone()];
        for h in field.factors() {
            tests.push(radical.div_exact(h)?);
        }
        let images: Vec<Vec<FieldElement>> = tests
            .iter()
            .map(|t| fp_basis.iter().map(|y| ctx.module_action(t, y)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        let annihilates = |beta: &FieldElement, imgs: &[FieldElement]| {
            imgs.iter().all(|w| ctx.absolute_trace(&ctx.mul(beta, w)) == 0)
        };
        let order_mask: Vec<u32> = (0..n)
            .into_par_iter()
            .map(|i| {
                let beta = field.element(i);
                if !annihilates(&beta, &images[0]) {
                    return NONE;
                }
                (0..r).filter(|&b| !annihilates(&beta, &images[b + 1])).fold(0, |a, b| a | 1 << b)
            })
            .collect();
        Ok(CharacterSystem { field, abs_trace, order_mask })
    }

    pub fn field(&self) -> &ScanField {
        self.field
    }

    /// ψ̂(y) = exp(2πi·Tr(y)/p) by element index.
    pub fn canonical_additive(&self, i: u64) -> Complex64 {
        root(self.abs_trace[i as usize] as u64, self.field.context().p() as u64)
    }

    /// ψ_β(x) = ψ̂(βx) by indices.
    pub fn additive(&self, beta: u64, x: u64) -> Complex64 {
        self.canonical_additive(self.mul_index(beta, x))
    }

    pub fn mult(&self, chi: MultChar, x: u64) -> Complex64 {
        match self.field.dlog().log_index(x) {
            None if chi.is_trivial() => Complex64::new(1.0, 0.0),
            None => Complex64::new(0.0, 0.0),
            Some(l) => root(chi.s * l as u64 % chi.d, chi.d),
        }
    }

    /// The characters of exact order d, d | q^m − 1.
    pub fn chars_of_order(&self, d: u64) -> Result<Vec<MultChar>> {
        if d == 0 || self.field.group_order() % d != 0 {
            return Err(Error::input(format!("{d} does not divide q^m - 1")));
        }
        Ok((0..d).filter(|&s| num_integer::gcd(s, d) == 1).map(|s| MultChar { d, s }).collect())
    }

    /// Factor mask of the F_q-order of ψ_β, None when that order is not squarefree.
    pub fn additive_order_mask(&self, beta: u64) -> Option<u32> {
        let m = self.order_mask[beta as usize];
        (m != NONE).then_some(m)
    }

    fn mul_index(&self, a: u64, b: u64) -> u64 {
        let dl = self.field.dlog();
        match (dl.log_index(a), dl.log_index(b)) {
            (Some(x), Some(y)) => dl.exp_index(x as u64 + y as u64),
            _ => 0,
        }
    }

    /// θ(e) Σ_{d|e} μ(d)/φ(d) Σ_{χ_d} χ_d(x).
    pub fn rho(&self, x: u64, spec: &FreenessSpec) -> Result<CharValue> {
        if x == 0 {
            return Err(Error::input("freeness is undefined at 0"));
        }
        let rad = spec.e_radical();
        let theta: f64 = spec.e_primes.iter().map(|&p| 1.0 - 1.0 / p as f64).product();
        let mut acc = Complex64::new(0.0, 0.0);
        for d in divisors_u64(rad) {
            let inner: Complex64 = self.chars_of_order(d)?.into_iter().map(|c| self.mult(c, x)).sum();
            acc += inner * (mobius_u64(d) as f64 / phi_u64(d) as f64);
        }
        CharValue::round(acc * theta)
    }

    /// Θ(g) Σ_{h|g} μ′(h)/Φ(h) Σ_{ψ of F_q-order h} ψ(x).
    pub fn eta(&self, x: u64, spec: &FreenessSpec) -> Result<CharValue> {
        let q = self.field.context().q() as f64;
        let degs: Vec<i32> = self.field.factors().iter().map(|h| h.deg() as i32).collect();
        let gmask: u32 = spec.g_factors.iter().fold(0, |a, &b| a | 1 << b);
        let big_theta: f64 = spec.g_factors.iter().map(|&i| 1.0 - q.powi(-degs[i])).product();
        let mut acc = Complex64::new(0.0, 0.0);
        for beta in 0..self.field.size() {
            let Some(mask) = self.additive_order_mask(beta) else { continue };
            if mask & !gmask != 0 {
                continue;
            }
            let bits = (0..degs.len()).filter(|b| mask >> b & 1 == 1);
            let big_phi: f64 = bits.clone().map(|b| q.powi(degs[b]) - 1.0).product();
            let mu = if bits.count() % 2 == 0 { 1.0 } else { -1.0 };
            acc += self.additive(beta, x) * (mu / big_phi);
        }
        CharValue::round(acc * big_theta)
    }

    /// (1/q) Σ_{c ∈ F_q} ψ̂_q(c·(Tr x − a)), the indicator of Tr x = a.
    pub fn tau(&self, x: u64, a: u32) -> Result<CharValue> {
        let base = self.field.context().base();
        let q = base.q();
        if a >= q {
            return Err(Error::input(format!("trace target outside F_{q}")));
        }
        let t = base.sub(&self.field.trace_index(x), &a);
        let p = base.p() as u64;
        let acc: Complex64 = (0..q).map(|c| root(base.abs_trace(base.mul(&c, &t)) as u64, p)).sum();
        CharValue::round(acc / q as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::make_context;
    use crate::oracle::{is_normal, DEFAULT_SCAN_LIMIT};

    #[test]
    fn rho_matches_e_free_on_f125() {
        let ctx = make_context(5, 1, 3, 0).unwrap();
        let sf = ScanField::new(&ctx, DEFAULT_SCAN_LIMIT).unwrap();
        let cs = CharacterSystem::new(&sf).unwrap();
        for e in divisors_u64(124) {
            let spec = FreenessSpec::new(&sf, e, &[]).unwrap();
            for i in 1..125 {
                let v = cs.rho(i, &spec).unwrap().value;
                assert_eq!(v == 1, sf.is_e_free_index(i, &spec));
                assert!(v == 0 || v == 1);
            }
        }
    }

    #[test]
    fn eta_and_tau_on_f16() {
        let ctx = make_context(2, 1, 4, 0).unwrap();
        let sf = ScanField::new(&ctx, DEFAULT_SCAN_LIMIT).unwrap();
        let cs = CharacterSystem::new(&sf).unwrap();
        let full = FreenessSpec::full(&sf);
        for i in 0..16 {
            assert_eq!(cs.eta(i, &full).unwrap().value == 1, is_normal(&ctx, &sf.element(i)).unwrap());
        }
        for a in 0..2 {
            let s: i64 = (0..16).map(|i| cs.tau(i, a).unwrap().value).sum();
            assert_eq!(s, 8);
        }
    }

    #[test]
    fn char_orders_and_zero() {
        let ctx = make_context(5, 1, 2, 0).unwrap();
        let sf = ScanField::new(&ctx, DEFAULT_SCAN_LIMIT).unwrap();
        let cs = CharacterSystem::new(&sf).unwrap();
        for c in cs.chars_of_order(6).unwrap() {
            assert!(cs.mult(c, 0).norm() == 0.0);
            let g = sf.index(sf.dlog().generator());
            let v = cs.mult(c, g);
            assert!((v.powu(6) - 1.0).norm() < 1e-9 && (v.powu(3) - 1.0).norm() > 1e-3 && (v.powu(2) - 1.0).norm() > 1e-3);
        }
        assert_eq!(cs.mult(MultChar { d: 1, s: 0 }, 0), Complex64::new(1.0, 0.0));
        assert_eq!(cs.additive_order_mask(0), Some(0));
        assert!(cs.chars_of_order(5).is_err());
    }
}
