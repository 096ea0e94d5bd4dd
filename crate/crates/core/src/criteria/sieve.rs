use super::{log10_big, PairInstance};
use crate::error::{Error, Result};
use crate::ffield::BaseField;
use crate::numtheory::{unknown_prime_bound, IntFactorization};
use crate::polyalg::{CycloFactorization, Poly};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

const LOG10_2: f64 = std::f64::consts::LOG10_2;

/// Which expression for l is used.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LFormula {
    /// 1 − 2Σ1/p_i − 2Σ1/q^{deg g_i}
    #[default]
    Symmetric,
    /// 1 − 2Σ1/p_i − Σ1/q^{deg g_i}
    Printed,
}

/// Primes of q^m − 1 and distinct factors of x^m − 1, both in sieve order.
#[derive(Clone, Debug)]
pub struct SieveSetup {
    pub instance: PairInstance,
    /// Known primes, ascending.
    pub primes: Vec<BigUint>,
    /// Upper bound on the number of primes hidden in a composite cofactor.
    pub unknown_primes: u32,
    /// Every hidden prime is at least this large.
    pub trial_bound: BigUint,
    /// Degrees of the distinct factors, ascending.
    pub factor_degrees: Vec<u64>,
    pub factor_labels: Vec<String>,
    pub factor_polys: Option<Vec<Poly<BaseField>>>,
    pub m_prime: u64,
    pub order_e: u64,
    pub l_formula: LFormula,
}

impl SieveSetup {
    pub fn new(
        instance: PairInstance,
        qm1: &IntFactorization,
        cyclo: &CycloFactorization,
        trial_bound: &BigUint,
    ) -> Result<Self> {
        if qm1.value() != &(instance.q().pow(instance.m as u32) - 1u32) {
            return Err(Error::input("factorization does not belong to q^m - 1"));
        }
        if cyclo.m != instance.m || cyclo.p != instance.p || cyclo.k != instance.k {
            return Err(Error::input("cyclotomic data does not belong to the instance"));
        }
        let unknown = if qm1.is_complete() { 0 } else { unknown_prime_bound(qm1, trial_bound)? };
        let mut primes: Vec<BigUint> = qm1.primes().cloned().collect();
        primes.sort();
        let mut order: Vec<usize> = (0..cyclo.cosets.len()).collect();
        order.sort_by_key(|&i| cyclo.cosets[i].len());
        let factor_degrees = order.iter().map(|&i| cyclo.cosets[i].len() as u64).collect();
        let factor_polys = cyclo
            .factors
            .as_ref()
            .map(|fs| order.iter().map(|&i| fs[i].clone()).collect::<Vec<_>>());
        let factor_labels = match &factor_polys {
            Some(fs) => fs.iter().map(|f| f.to_string()).collect(),
            None => order
                .iter()
                .map(|&i| format!("deg {} coset {}", cyclo.cosets[i].len(), cyclo.cosets[i][0]))
                .collect(),
        };
        Ok(SieveSetup {
            instance,
            primes,
            unknown_primes: unknown,
            trial_bound: trial_bound.clone(),
            factor_degrees,
            factor_labels,
            factor_polys,
            m_prime: cyclo.m_prime,
            order_e: cyclo.order() as u64,
            l_formula: LFormula::Symmetric,
        })
    }

    pub fn is_complete(&self) -> bool {
        self.unknown_primes == 0
    }

    pub fn factor_index(&self, f: &Poly<BaseField>) -> Option<usize> {
        let f = f.monic();
        self.factor_polys.as_ref()?.iter().position(|g| *g == f)
    }

    fn g_weight(&self, deg: u64) -> BigRational {
        let q = self.instance.q();
        let den: BigInt = q.pow(deg as u32).into();
        let num = match self.l_formula {
            LFormula::Symmetric => 2,
            LFormula::Printed => 1,
        };
        BigRational::new(BigInt::from(num), den)
    }
}

/// One choice of (d, g) with l, Λ and the resulting verdict.
#[derive(Clone, Debug, Serialize)]
pub struct SieveEvaluation {
    pub instance: PairInstance,
    #[serde(serialize_with = "ser_vec")]
    pub d_primes: Vec<BigUint>,
    /// Whether d also absorbs the primes hidden in the cofactor.
    pub d_includes_cofactor: bool,
    #[serde(serialize_with = "ser_vec")]
    pub remaining_primes: Vec<BigUint>,
    /// Hidden primes counted among the remaining ones (bounded mode).
    pub remaining_unknown: u32,
    pub g_factors: Vec<String>,
    pub g_degrees: Vec<u64>,
    pub remaining_degrees: Vec<u64>,
    pub r: usize,
    pub s: usize,
    #[serde(serialize_with = "ser_ratio")]
    pub l: BigRational,
    pub l_f64: f64,
    #[serde(rename = "Lambda")]
    pub lambda: Option<f64>,
    /// log2 of the W(d) value used (exact, or an upper bound).
    pub w_d_log2: u64,
    pub w_g_log2: u64,
    pub lhs_log10: f64,
    pub rhs_log10: Option<f64>,
    pub holds: bool,
    /// A "holds" that rests on exact W values or on valid upper bounds.
    pub certified: bool,
    pub bounded: bool,
    pub l_formula: LFormula,
}

fn ser_vec<S: serde::Serializer>(v: &[BigUint], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

fn ser_ratio<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn q_power(q: &BigUint, e: i64) -> BigRational {
    let p: BigInt = q.pow(e.unsigned_abs() as u32).into();
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

/// Core evaluation: `in_d[i]` for known primes, `in_g[i]` for factors.
fn evaluate(setup: &SieveSetup, in_d: &[bool], all_d: bool, in_g: &[bool]) -> SieveEvaluation {
    let inst = setup.instance;
    let mut d_primes = Vec::new();
    let mut remaining = Vec::new();
    let mut l = BigRational::one();
    for (p, &keep) in setup.primes.iter().zip(in_d) {
        if keep || all_d {
            d_primes.push(p.clone());
        } else {
            l -= BigRational::new(BigInt::from(2), BigInt::from(p.clone()));
            remaining.push(p.clone());
        }
    }
    let remaining_unknown = if all_d { 0 } else { setup.unknown_primes };
    if remaining_unknown > 0 {
        l -= BigRational::new(BigInt::from(2 * remaining_unknown), BigInt::from(setup.trial_bound.clone()));
    }
    let mut g_factors = Vec::new();
    let mut g_degrees = Vec::new();
    let mut remaining_degrees = Vec::new();
    for (i, &keep) in in_g.iter().enumerate() {
        let deg = setup.factor_degrees[i];
        if keep {
            g_factors.push(setup.factor_labels[i].clone());
            g_degrees.push(deg);
        } else {
            l -= setup.g_weight(deg);
            remaining_degrees.push(deg);
        }
    }
    let r = remaining.len() + remaining_unknown as usize;
    let s = remaining_degrees.len();
    let w_d_log2 = d_primes.len() as u64 + if all_d { setup.unknown_primes as u64 } else { 0 };
    let w_g_log2 = g_factors.len() as u64;
    let lq = inst.log10_q();
    let lhs_log10 = (inst.m as f64 / 2.0 - 2.0) * lq;
    let c = BigUint::from(2 * inst.n + 1);
    let (lambda, rhs_log10, holds) = if l > BigRational::zero() {
        let lam = BigRational::from_integer(BigInt::from(2 * (r + s) as i64 - 1)) / &l
            + BigRational::from_integer(BigInt::from(2));
        let lam_f = lam.to_f64().unwrap();
        let rhs = log10_big(&c) + 2.0 * (w_d_log2 + w_g_log2) as f64 * LOG10_2 + lam_f.log10();
        let lhs_sq = q_power(&inst.q(), inst.m as i64 - 4);
        let w4: BigInt = BigInt::one() << (4 * (w_d_log2 + w_g_log2)) as usize;
        let cb: BigInt = c.into();
        let rhs_sq = BigRational::from_integer(&cb * &cb * w4) * &lam * &lam;
        (Some(lam_f), Some(rhs), lhs_sq > rhs_sq)
    } else {
        (None, None, false)
    };
    let bounded = setup.unknown_primes > 0;
    SieveEvaluation {
        instance: inst,
        d_primes,
        d_includes_cofactor: all_d && bounded,
        remaining_primes: remaining,
        remaining_unknown,
        g_factors,
        g_degrees,
        remaining_degrees,
        r,
        s,
        l_f64: l.to_f64().unwrap(),
        l,
        lambda,
        w_d_log2,
        w_g_log2,
        lhs_log10,
        rhs_log10,
        holds,
        certified: holds,
        bounded,
        l_formula: setup.l_formula,
    }
}

/// Evaluates the sieve inequality for explicit d (known primes) and g (factor indices).
pub fn sieve_evaluate(setup: &SieveSetup, d_primes: &[BigUint], g_factors: &[usize]) -> Result<SieveEvaluation> {
    if !setup.is_complete() {
        return Err(Error::Incomplete {
            value: format!("{}^{}-1", setup.instance.q(), setup.instance.m),
            cofactor: "composite".into(),
        });
    }
    let (in_d, in_g) = masks(setup, d_primes, g_factors)?;
    Ok(evaluate(setup, &in_d, false, &in_g))
}

/// Like [`sieve_evaluate`] for a partial factorization: hidden primes are either all
/// absorbed into d (W(d) bounded above) or all counted as remaining primes of size
/// at least the trial bound.
pub fn sieve_evaluate_bounded(
    setup: &SieveSetup,
    d_primes: &[BigUint],
    d_includes_cofactor: bool,
    g_factors: &[usize],
) -> Result<SieveEvaluation> {
    let (in_d, in_g) = masks(setup, d_primes, g_factors)?;
    Ok(evaluate(setup, &in_d, d_includes_cofactor && d_primes.len() == setup.primes.len(), &in_g))
}

fn masks(setup: &SieveSetup, d_primes: &[BigUint], g_factors: &[usize]) -> Result<(Vec<bool>, Vec<bool>)> {
    let mut in_d = vec![false; setup.primes.len()];
    for p in d_primes {
        let i = setup
            .primes
            .iter()
            .position(|x| x == p)
            .ok_or_else(|| Error::input(format!("{p} is not a known prime of q^m - 1")))?;
        in_d[i] = true;
    }
    let mut in_g = vec![false; setup.factor_degrees.len()];
    for &i in g_factors {
        if i >= in_g.len() || in_g[i] {
            return Err(Error::input(format!("bad factor index {i}")));
        }
        in_g[i] = true;
    }
    Ok((in_d, in_g))
}

#[derive(Clone, Debug, Serialize)]
pub struct SieveSearchResult {
    pub found: Option<SieveEvaluation>,
    pub evaluations: u64,
    pub budget: u64,
    pub exhausted: bool,
    /// d = q^m − 1, g = factors of degree below e.
    pub lemma_selection: Option<SieveEvaluation>,
    /// Λ ≤ 2m′ for the lemma selection.
    pub lemma_lambda_within_bound: Option<bool>,
}

/// The lemma selection applies when e > 2 and m′ ∤ q − 1.
pub fn lemma_selection(setup: &SieveSetup) -> Option<SieveEvaluation> {
    let e = setup.order_e;
    let qm1 = (setup.instance.q() - 1u32) % setup.m_prime;
    if e <= 2 || qm1.is_zero() {
        return None;
    }
    let in_d = vec![true; setup.primes.len()];
    let in_g: Vec<bool> = setup.factor_degrees.iter().map(|&d| d < e).collect();
    Some(evaluate(setup, &in_d, true, &in_g))
}

/// Grid search over (t smallest primes kept in d) × (u lowest-degree factors kept in g),
/// both scanned from everything kept downward, g shrinking first.
pub fn sieve_search(setup: &SieveSetup, budget: u64) -> SieveSearchResult {
    let inst = setup.instance;
    let lq = inst.log10_q();
    let lhs = (inst.m as f64 / 2.0 - 2.0) * lq;
    let c = ((2 * inst.n + 1) as f64).log10();
    let nr = setup.primes.len();
    let ns = setup.factor_degrees.len();
    let mut sp = vec![0f64; nr + 1];
    for i in (0..nr).rev() {
        sp[i] = sp[i + 1] + 1.0 / setup.primes[i].to_f64().unwrap();
    }
    let gw = match setup.l_formula {
        LFormula::Symmetric => 2.0,
        LFormula::Printed => 1.0,
    };
    let mut sg = vec![0f64; ns + 1];
    for i in (0..ns).rev() {
        sg[i] = sg[i + 1] + gw * 10f64.powf(-(setup.factor_degrees[i] as f64) * lq);
    }
    let unk = setup.unknown_primes as usize;
    let unk_term = if unk > 0 { 2.0 * unk as f64 / setup.trial_bound.to_f64().unwrap() } else { 0.0 };
    let mut evaluations = 0u64;
    let mut found = None;
    let mut exhausted = false;
    // t = nr + 1 stands for d = q^m − 1 including hidden primes
    let top = if unk > 0 { nr + 1 } else { nr };
    'outer: for t in (0..=top).rev() {
        let all_d = t == nr + 1;
        let kept = t.min(nr);
        let (r, wd, prime_sum) = if all_d {
            (0, nr + unk, 0.0)
        } else {
            (nr - kept + unk, kept, 2.0 * sp[kept] + unk_term)
        };
        for u in (0..=ns).rev() {
            if evaluations >= budget {
                exhausted = true;
                break 'outer;
            }
            evaluations += 1;
            let s = ns - u;
            let l = 1.0 - prime_sum - sg[u];
            if l <= 0.0 {
                continue;
            }
            let lam = (2.0 * (r + s) as f64 - 1.0) / l + 2.0;
            let rhs = c + 2.0 * (wd + u) as f64 * LOG10_2 + lam.log10();
            if lhs - rhs > -1e-9 {
                let in_d: Vec<bool> = (0..nr).map(|i| i < kept).collect();
                let in_g: Vec<bool> = (0..ns).map(|i| i < u).collect();
                let ev = evaluate(setup, &in_d, all_d, &in_g);
                if ev.holds {
                    found = Some(ev);
                    break 'outer;
                }
            }
        }
    }
    let lemma = lemma_selection(setup);
    let within = lemma
        .as_ref()
        .map(|ev| ev.lambda.is_some_and(|lam| lam <= 2.0 * setup.m_prime as f64));
    if found.is_none() {
        if let Some(ev) = &lemma {
            if ev.holds {
                found = Some(ev.clone());
            }
        }
    }
    SieveSearchResult {
        found,
        evaluations,
        budget,
        exhausted,
        lemma_selection: lemma,
        lemma_lambda_within_bound: within,
    }
}
