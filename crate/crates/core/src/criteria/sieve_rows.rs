//! Re-evaluation of the published sieve choices (d, g) per instance.

use super::reference::SieveRowRef;
use super::sieve::{sieve_evaluate, LFormula, SieveEvaluation, SieveSetup};
use super::PairInstance;
use crate::error::{Error, Result};
use crate::ffield::{BaseField, Field};
use crate::numtheory::{factor_u64, Factorizer};
use crate::polyalg::{cyclotomic_factorization, Poly};
use num_bigint::BigUint;

/// Base field used to read printed factors x + c0 + c1·β, β its generator.
pub fn sieve_row_base(p: u64, q: u64) -> Result<BaseField> {
    let mut k = 0;
    let mut t = q;
    while t > 1 && t % p == 0 {
        t /= p;
        k += 1;
    }
    if t != 1 {
        return Err(Error::input(format!("{q} is not a power of {p}")));
    }
    BaseField::new(p, k, 0)
}

pub fn sieve_row_reproduce(
    p: u64,
    n: u64,
    row: &SieveRowRef,
    fz: &Factorizer,
    l_formula: LFormula,
) -> Result<SieveEvaluation> {
    let base = sieve_row_base(p, row.q)?;
    let inst = PairInstance::new(p, base.k(), row.m, n);
    let qm1 = fz.factor_qm_minus_1(p, base.k() as u64, row.m)?;
    let cyclo = cyclotomic_factorization(&base, row.m, u64::MAX)?;
    let mut setup = SieveSetup::new(inst, &qm1, &cyclo, &fz.trial_bound())?;
    setup.l_formula = l_formula;
    let d_primes: Vec<BigUint> = factor_u64(row.d).into_iter().map(|(l, _)| BigUint::from(l)).collect();
    let beta = base.generator();
    let g = row
        .g
        .iter()
        .map(|&[c0, c1]| {
            let c = base.add(&base.from_int(c0 as i64), &base.mul(&base.from_int(c1 as i64), &beta));
            let h = Poly::new(base.clone(), vec![c, base.one()]);
            setup
                .factor_index(&h)
                .ok_or_else(|| Error::input(format!("{h} does not divide x^{} - 1", row.m)))
        })
        .collect::<Result<Vec<_>>>()?;
    sieve_evaluate(&setup, &d_primes, &g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::reference::reference;
    use crate::numtheory::FactorEffort;

    #[test]
    fn anchor_rows() {
        let fz = Factorizer::new(FactorEffort::default(), None);
        let rows = &reference().sieve_rows;
        let a = sieve_row_reproduce(5, 4, &rows[0], &fz, LFormula::Symmetric).unwrap();
        assert!((a.l_f64 - 0.990).abs() < 0.005 && (a.lambda.unwrap() - 9.07).abs() < 0.05);
        assert!(a.holds && a.r == 1 && a.s == 3);
        let b = sieve_row_reproduce(5, 4, &rows[1], &fz, LFormula::Symmetric).unwrap();
        assert!((b.l_f64 - 0.633).abs() < 0.005 && (b.lambda.unwrap() - 19.37).abs() < 0.05);
    }
}
