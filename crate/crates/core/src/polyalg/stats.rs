use super::{factor_poly, Poly};
use crate::error::{Error, Result};
use crate::ffield::BaseField;
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;

/// Polynomial analogues of ω, W, φ, θ, μ for a monic g over F_q.
#[derive(Clone, Debug)]
pub struct PolyDivisorStats {
    pub poly: Poly<BaseField>,
    pub w: usize,
    pub big_w: BigUint,
    pub phi: BigUint,
    pub theta: BigRational,
    pub mu_prime: i8,
}

pub fn divisor_stats(g: &Poly<BaseField>) -> Result<PolyDivisorStats> {
    if !g.is_monic() {
        return Err(Error::input("divisor_stats needs a monic nonzero polynomial"));
    }
    let q = BigUint::from(g.field().q());
    let fs = factor_poly(g)?;
    let mut phi = BigUint::one();
    for (f, e) in &fs {
        let d = f.deg() as u32;
        phi *= q.pow((*e as u32 - 1) * d) * (q.pow(d) - 1u32);
    }
    let theta = BigRational::new(phi.clone().into(), q.pow(g.deg() as u32).into());
    let squarefree = fs.iter().all(|(_, e)| *e == 1);
    let mu_prime = match (squarefree, fs.len() % 2) {
        (false, _) => 0,
        (true, 0) => 1,
        (true, _) => -1,
    };
    Ok(PolyDivisorStats {
        poly: g.clone(),
        w: fs.len(),
        big_w: BigUint::one() << fs.len(),
        phi,
        theta,
        mu_prime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let f5 = BaseField::new(5, 1, 0).unwrap();
        let s = divisor_stats(&Poly::parse(f5.clone(), "x+4").unwrap()).unwrap();
        assert_eq!(s.phi, BigUint::from(4u32));
        assert_eq!(s.theta, BigRational::new(4.into(), 5.into()));
        assert_eq!((s.big_w.clone(), s.mu_prime), (BigUint::from(2u32), -1));
        let g = Poly::parse(f5.clone(), "x - 1").unwrap().mul(&Poly::parse(f5.clone(), "x^2+x+1").unwrap());
        let s = divisor_stats(&g).unwrap();
        assert_eq!((s.mu_prime, s.big_w), (1, BigUint::from(4u32)));
        let sq = Poly::parse(f5.clone(), "x - 1").unwrap().pow(2);
        assert_eq!(divisor_stats(&sq).unwrap().mu_prime, 0);
        // Θ is multiplicative on coprime arguments
        let a = Poly::parse(f5.clone(), "x^2+x+1").unwrap();
        let b = Poly::parse(f5.clone(), "x+2").unwrap().pow(3);
        let tab = divisor_stats(&a.mul(&b)).unwrap().theta;
        assert_eq!(tab, divisor_stats(&a).unwrap().theta * divisor_stats(&b).unwrap().theta);
    }
}
