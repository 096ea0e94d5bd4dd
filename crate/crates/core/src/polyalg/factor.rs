//! Squarefree decomposition, distinct-degree and Cantor–Zassenhaus equal-degree splitting.

use super::Poly;
use crate::error::{Error, Result};
use crate::ffield::Field;
use crate::numtheory::factor_u64;
use num_bigint::BigUint;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Pairs (g_i, i) with f = lc·Π g_i^i, each g_i squarefree monic.
pub fn squarefree_decomposition<F: Field>(f: &Poly<F>) -> Vec<(Poly<F>, usize)> {
    let f = f.monic();
    let mut out = Vec::new();
    if f.deg() == 0 {
        return out;
    }
    let p = f.field().characteristic() as usize;
    let fp = f.derivative();
    if fp.is_zero() {
        for (g, e) in squarefree_decomposition(&f.pth_root()) {
            out.push((g, e * p));
        }
        return out;
    }
    let mut c = f.gcd(&fp);
    let mut w = f.div_exact(&c).unwrap();
    let mut i = 1;
    while !w.is_one() {
        let y = w.gcd(&c);
        let fac = w.div_exact(&y).unwrap();
        if !fac.is_one() {
            out.push((fac, i));
        }
        w = y;
        c = c.div_exact(&w).unwrap();
        i += 1;
    }
    if !c.is_one() {
        for (g, e) in squarefree_decomposition(&c.pth_root()) {
            out.push((g, e * p));
        }
    }
    out
}

/// Splits a squarefree monic f into (product of all degree-d factors, d).
fn distinct_degree<F: Field>(f: &Poly<F>) -> Vec<(Poly<F>, usize)> {
    let q = f.field().size();
    let x = Poly::x(f.field().clone());
    let mut out = Vec::new();
    let mut rest = f.clone();
    let mut h = x.rem(&rest).unwrap();
    let mut d = 0;
    while rest.deg() >= 2 * (d + 1) {
        d += 1;
        h = h.powmod(&q, &rest).unwrap();
        let g = rest.gcd(&h.sub(&x));
        if !g.is_one() {
            rest = rest.div_exact(&g).unwrap();
            h = h.rem(&rest).unwrap();
            out.push((g, d));
        }
    }
    if rest.deg() > 0 {
        let d = rest.deg();
        out.push((rest, d));
    }
    out
}

fn equal_degree<F: Field>(g: &Poly<F>, d: usize, rng: &mut ChaCha8Rng, out: &mut Vec<Poly<F>>) {
    let n = g.deg();
    if n == d {
        out.push(g.clone());
        return;
    }
    let field = g.field().clone();
    let q = field.size();
    let p = field.characteristic();
    let one = Poly::one(field.clone());
    loop {
        let a = Poly::new(field.clone(), (0..n).map(|_| field.random(rng)).collect());
        if a.deg() == 0 {
            continue;
        }
        let b = if p == 2 {
            // trace map Σ_{i < s·d} a^{2^i} where q = 2^s
            let s = (q.bits() - 1) as usize;
            let mut t = a.rem(g).unwrap();
            let mut acc = t.clone();
            for _ in 1..s * d {
                t = t.mul(&t).rem(g).unwrap();
                acc = acc.add(&t);
            }
            acc
        } else {
            let e = (q.pow(d as u32) - BigUint::one()) >> 1u32;
            a.powmod(&e, g).unwrap().sub(&one)
        };
        let h = g.gcd(&b);
        if h.deg() > 0 && h.deg() < n {
            let other = g.div_exact(&h).unwrap();
            equal_degree(&h, d, rng, out);
            equal_degree(&other, d, rng, out);
            return;
        }
    }
}

/// Monic irreducible factors with multiplicities, sorted; the leading coefficient is dropped.
pub fn factor_poly_seeded<F: Field>(f: &Poly<F>, seed: u64) -> Result<Vec<(Poly<F>, usize)>> {
    if f.is_zero() {
        return Err(Error::input("cannot factor the zero polynomial"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (g, e) in squarefree_decomposition(f) {
        for (h, d) in distinct_degree(&g) {
            let mut parts = Vec::new();
            equal_degree(&h, d, &mut rng, &mut parts);
            out.extend(parts.into_iter().map(|p| (p, e)));
        }
    }
    out.sort();
    Ok(out)
}

pub fn factor_poly<F: Field>(f: &Poly<F>) -> Result<Vec<(Poly<F>, usize)>> {
    factor_poly_seeded(f, 0)
}

impl<F: Field> Poly<F> {
    /// Rabin's test: x^{Q^n} ≡ x and gcd(x^{Q^{n/r}} − x, f) = 1 for primes r | n.
    pub fn is_irreducible(&self) -> bool {
        let n = match self.degree() {
            None | Some(0) => return false,
            Some(1) => return true,
            Some(n) => n,
        };
        let f = self.monic();
        let q = f.field().size();
        let x = Poly::x(f.field().clone());
        let mut pows = Vec::with_capacity(n + 1);
        let mut h = x.clone();
        pows.push(h.clone());
        for _ in 0..n {
            h = h.powmod(&q, &f).unwrap();
            pows.push(h.clone());
        }
        if pows[n] != x.rem(&f).unwrap() {
            return false;
        }
        factor_u64(n as u64)
            .into_iter()
            .all(|(r, _)| f.gcd(&pows[n / r as usize].sub(&x)).is_one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::{make_context, BaseField, PrimeField};
    use rand::Rng;

    fn recombine<F: Field>(fs: &[(Poly<F>, usize)], field: F) -> Poly<F> {
        fs.iter().fold(Poly::one(field), |acc, (g, e)| acc.mul(&g.pow(*e as u64)))
    }

    #[test]
    fn examples_over_f5() {
        let f5 = PrimeField::new(5).unwrap();
        let f = Poly::parse(f5, "x^2 + 1").unwrap();
        let fs = factor_poly(&f).unwrap();
        assert_eq!(fs.len(), 2);
        assert_eq!(fs[0].0.to_string(), "x + 2");
        assert_eq!(fs[1].0.to_string(), "x + 3");
        let g = Poly::parse(f5, "x^2 + x + 1").unwrap();
        assert_eq!(factor_poly(&g).unwrap(), vec![(g.clone(), 1)]);
        let h = Poly::parse(f5, "x^10 - 1").unwrap();
        let fs = factor_poly(&h).unwrap();
        assert_eq!(fs.len(), 2);
        assert!(fs.iter().all(|(g, e)| g.deg() == 1 && *e == 5));
    }

    #[test]
    fn random_products_recombine() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (p, k) in [(2u64, 1u32), (2, 3), (5, 1), (5, 2), (3, 2)] {
            let base = BaseField::new(p, k, 1).unwrap();
            for _ in 0..8 {
                let mut f = Poly::one(base.clone());
                for _ in 0..3 {
                    let g = Poly::new(base.clone(), (0..4).map(|_| base.random(&mut rng)).collect());
                    if !g.is_zero() {
                        f = f.mul(&g.pow(1 + rng.gen_range(0..3u64)));
                    }
                }
                let fs = factor_poly(&f).unwrap();
                assert_eq!(recombine(&fs, base.clone()), f.monic());
                assert!(fs.iter().all(|(g, _)| g.is_irreducible() && g.is_monic()));
            }
        }
    }

    #[test]
    fn over_extension_field() {
        let ctx = make_context(5, 1, 3, 2).unwrap();
        let f = Poly::parse(ctx.clone(), "x^4 + x + [1,0,2]").unwrap();
        let fs = factor_poly(&f).unwrap();
        assert_eq!(recombine(&fs, ctx.clone()), f);
    }

}
