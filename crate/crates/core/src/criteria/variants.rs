use super::{log10_big, CriterionReport, PairInstance, Variant, Verdict};
use crate::error::{Error, Result};
use crate::numtheory::WBoundParams;
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

const LOG10_2: f64 = std::f64::consts::LOG10_2;

/// A value of W(·): exact, or a certified upper bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WInput {
    #[serde(serialize_with = "ser_big")]
    pub value: BigUint,
    pub exact: bool,
}

fn ser_big<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl WInput {
    pub fn exact(value: BigUint) -> Self {
        WInput { value, exact: true }
    }
    pub fn bound(value: BigUint) -> Self {
        WInput { value, exact: false }
    }
}

/// q^{m/2−2} > (2n+1)·W(q^m−1)²·W(x^m−1)², compared exactly after squaring.
pub fn suff_check(inst: &PairInstance, w_qm: &WInput, w_xm: &BigUint) -> CriterionReport {
    let q = inst.q();
    let m = inst.m;
    let lhs_sq = q.pow(m.saturating_sub(4) as u32);
    let c = BigUint::from(2 * inst.n + 1);
    let rhs_sq = &c * &c * w_qm.value.pow(4) * w_xm.pow(4) * q.pow(4u64.saturating_sub(m) as u32);
    let holds = lhs_sq > rhs_sq;
    let lhs_log10 = (m as f64 / 2.0 - 2.0) * inst.log10_q();
    let rhs_log10 = log10_big(&c) + 2.0 * log10_big(&w_qm.value) + 2.0 * log10_big(w_xm);
    let verdict = match (holds, w_qm.exact) {
        (true, _) => Verdict::Holds,
        (false, true) => Verdict::Fails,
        (false, false) => Verdict::Inconclusive,
    };
    CriterionReport {
        instance: *inst,
        variant: Variant::Suff,
        nu: None,
        lhs_log10,
        rhs_log10,
        holds,
        verdict,
        error_margin: 0.0,
        near_margin: lhs_sq == rhs_sq,
        exact: true,
    }
}

/// Whether the δ-form's weight uses m (as in the relaxed printed form) or m′.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaScale {
    #[default]
    Relaxed,
    Unrelaxed,
}

#[derive(Clone, Debug, Default)]
pub struct VariantInputs {
    pub d: Option<WBoundParams>,
    /// W(x^m − 1) = 2^w.
    pub w_xm_exponent: Option<u64>,
    pub m_prime: Option<u64>,
    pub delta: Option<BigRational>,
    pub delta_scale: DeltaScale,
}

struct Terms {
    sum: f64,
    comp: f64,
    mag: f64,
}

impl Terms {
    fn new() -> Self {
        Terms { sum: 0.0, comp: 0.0, mag: 0.0 }
    }
    fn add(&mut self, t: f64) {
        let s = self.sum + t;
        if self.sum.abs() >= t.abs() {
            self.comp += (self.sum - s) + t;
        } else {
            self.comp += (t - s) + self.sum;
        }
        self.sum = s;
        self.mag += t.abs();
    }
    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn missing(v: Variant, what: &str) -> Error {
    Error::MissingInput { variant: format!("{v:?}"), what: what.into() }
}

/// Log-space evaluation of the D-, D1-, m′- and δ-forms (and SUFF given W(x^m−1) only
/// through its exponent, which is rarely useful; prefer [`suff_check`]).
pub fn variant_check(inst: &PairInstance, variant: Variant, inputs: &VariantInputs) -> Result<CriterionReport> {
    if variant == Variant::Suff {
        return Err(Error::input("use suff_check for SUFF"));
    }
    let d = inputs.d.as_ref().ok_or_else(|| missing(variant, "nu and D"))?;
    let nu = d.nu;
    let lq = inst.log10_q();
    let m = inst.m as f64;
    let c = ((2 * inst.n + 1) as f64).log10();
    let mut lhs = Terms::new();
    lhs.add((m / 2.0 - 2.0) * lq);
    let mut rhs = Terms::new();
    rhs.add(2.0 * d.log10_d);
    rhs.add(2.0 * m / nu * lq);
    match variant {
        Variant::DForm => {
            rhs.add(c);
            rhs.add(2.0 * m * LOG10_2);
        }
        Variant::D1Form => {
            let w = inputs.w_xm_exponent.ok_or_else(|| missing(variant, "W(x^m-1)"))?;
            rhs.add(c);
            rhs.add(2.0 * w as f64 * LOG10_2);
        }
        Variant::MprimeForm => {
            let mp = inputs.m_prime.ok_or_else(|| missing(variant, "m'"))?;
            check_m_prime(inst, mp)?;
            rhs.add(c);
            rhs.add(2.0 * mp as f64 * LOG10_2);
        }
        Variant::DeltaForm => {
            let delta = inputs.delta.as_ref().ok_or_else(|| missing(variant, "delta"))?;
            let delta = delta.to_f64().unwrap();
            let s = match inputs.delta_scale {
                DeltaScale::Relaxed => m,
                DeltaScale::Unrelaxed => {
                    let mp = inputs.m_prime.ok_or_else(|| missing(variant, "m'"))?;
                    check_m_prime(inst, mp)?;
                    mp as f64
                }
            };
            rhs.add(c);
            rhs.add((2.0 * s).log10());
            rhs.add(2.0 * s * delta * LOG10_2);
        }
        Variant::Suff => unreachable!(),
    }
    let (l, r) = (lhs.value(), rhs.value());
    let error_margin = 4.0 * f64::EPSILON * (lhs.mag + rhs.mag) + 2.0 * d.error_margin;
    let holds = l > r;
    Ok(CriterionReport {
        instance: *inst,
        variant,
        nu: Some(nu),
        lhs_log10: l,
        rhs_log10: r,
        holds,
        verdict: if holds { Verdict::Holds } else { Verdict::Fails },
        error_margin,
        near_margin: (l - r).abs() < error_margin.max(1e-6),
        exact: false,
    })
}

fn check_m_prime(inst: &PairInstance, mp: u64) -> Result<()> {
    let mut t = inst.m;
    if mp == 0 || t % mp != 0 || mp % inst.p == 0 {
        return Err(Error::input(format!("{mp} is not the p-free part of m = {}", inst.m)));
    }
    t /= mp;
    while t % inst.p == 0 {
        t /= inst.p;
    }
    if t != 1 {
        return Err(Error::input(format!("{mp} is not the p-free part of m = {}", inst.m)));
    }
    Ok(())
}

/// Least k for which the D-form holds at fixed m (the log-difference is linear in k).
pub fn d_form_min_k(p: u64, m: u64, n: u64, d: &WBoundParams) -> Option<u64> {
    let lp = (p as f64).log10();
    let mf = m as f64;
    let a = lp * (mf / 2.0 - 2.0 - 2.0 * mf / d.nu);
    let b = ((2 * n + 1) as f64).log10() + 2.0 * d.log10_d + 2.0 * mf * LOG10_2;
    if a <= 0.0 {
        return None;
    }
    let holds = |k: u64| {
        let inst = PairInstance::new(p, k as u32, m, n);
        let inputs = VariantInputs { d: Some(d.clone()), ..Default::default() };
        variant_check(&inst, Variant::DForm, &inputs).map(|r| r.holds).unwrap_or(false)
    };
    let mut k = ((b / a).floor() as u64 + 1).max(1);
    while k > 1 && holds(k - 1) {
        k -= 1;
    }
    while !holds(k) {
        k += 1;
    }
    Some(k)
}

/// Least M in [from, to] such that `holds` is true on all of [M, to].
pub fn least_threshold(from: u64, to: u64, holds: impl Fn(u64) -> bool) -> Option<u64> {
    if from > to || !holds(to) {
        return None;
    }
    let mut m = to;
    while m > from && holds(m - 1) {
        m -= 1;
    }
    Some(m)
}
