//! Decision cascade over q = p^k: closed-form inequalities first, then SUFF with exact
//! or bounded W(q^m − 1), then the sieve.

use super::delta::{delta_compute, MDecomposition};
use super::reference::reference;
use super::sieve::{sieve_search, LFormula, SieveEvaluation, SieveSetup};
use super::thresholds::{d_form_min_m, default_nu_schedule, DCache, NuRow};
use super::variants::{
    least_threshold, suff_check, variant_check, DeltaScale, VariantInputs, WInput,
};
use super::{CriterionReport, PairInstance, Variant, Verdict};
use crate::error::Result;
use crate::numtheory::{
    big_w, divisors_u64, w_upper_bound, FactorEffort, FactorTable, Factorizer, IntFactorization, WBoundParams,
};
use crate::polyalg::cyclotomic_structure;
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeSet;
use std::sync::Arc;

#[derive(Clone, Debug, Serialize)]
pub struct PipelineConfig {
    pub p: u64,
    pub n: u64,
    pub small_k: Vec<u32>,
    /// Inclusive k range of the large-k stage; None skips it.
    pub large_k: Option<(u32, u32)>,
    pub m_min: u64,
    pub nu_schedule: Vec<NuRow>,
    /// ν values tried by the per-m closed forms.
    pub nu_grid: Vec<f64>,
    /// ν used for the generic δ-form threshold.
    pub delta_nu: f64,
    /// δ assumed for classes outside the special list.
    #[serde(serialize_with = "ser_ratio")]
    pub delta_generic: BigRational,
    /// Upper end of the threshold scans.
    pub scan_limit: u64,
    /// m′ up to this bound are checked for δ_sieve above `delta_generic`.
    pub delta_verify_limit: u64,
    pub sieve_budget: u64,
    pub effort: FactorEffort,
    /// Effort for the large-k stage, where most numbers are far beyond rho.
    pub large_k_effort: FactorEffort,
    pub l_formula: LFormula,
}

fn ser_ratio<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            p: 5,
            n: 4,
            small_k: vec![1, 2],
            large_k: Some((3, 47)),
            m_min: 9,
            nu_schedule: default_nu_schedule(),
            nu_grid: (0..=100).map(|i| 6.0 + i as f64 / 10.0).collect(),
            delta_nu: 11.3,
            delta_generic: BigRational::new(1.into(), 3.into()),
            scan_limit: 5000,
            delta_verify_limit: 20_000,
            sieve_budget: 200_000,
            effort: FactorEffort::default(),
            large_k_effort: FactorEffort {
                rho_iterations: 1 << 14,
                rho_max_bits: 160,
                ..FactorEffort::default()
            },
            l_formula: LFormula::Symmetric,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    MprimeForm,
    DeltaForm,
    D1Form,
    Suff,
    Sieve,
    Exception,
    Unresolved,
}

impl Stage {
    pub fn resolved(self) -> bool {
        !matches!(self, Stage::Exception | Stage::Unresolved)
    }
    pub fn name(self) -> &'static str {
        match self {
            Stage::MprimeForm => "mprime_form",
            Stage::DeltaForm => "delta_form",
            Stage::D1Form => "d1_form",
            Stage::Suff => "suff",
            Stage::Sieve => "sieve",
            Stage::Exception => "exception",
            Stage::Unresolved => "unresolved",
        }
    }
}

/// Best (largest lhs − rhs) evaluation of one closed form.
#[derive(Clone, Debug, Serialize)]
pub struct FormOutcome {
    pub variant: Variant,
    pub nu: f64,
    pub margin_log10: f64,
    pub holds: bool,
}

impl From<&CriterionReport> for FormOutcome {
    fn from(r: &CriterionReport) -> Self {
        FormOutcome {
            variant: r.variant,
            nu: r.nu.unwrap_or(f64::NAN),
            margin_log10: r.lhs_log10 - r.rhs_log10,
            holds: r.holds,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceVerdict {
    pub q: u64,
    pub k: u32,
    pub m: u64,
    pub m_prime: u64,
    pub j: u32,
    /// m′ divides q² − 1.
    pub case_one: bool,
    pub stage: Stage,
    pub forms: Vec<FormOutcome>,
    /// complete / external / partial, when q^m − 1 was factored.
    pub factorization: Option<&'static str>,
    /// log2 of the W(q^m − 1) value used by SUFF.
    pub w_qm_log2: Option<u64>,
    pub w_qm_exact: Option<bool>,
    pub suff_verdict: Option<Verdict>,
    pub sieve: Option<SieveEvaluation>,
    pub sieve_evaluations: u64,
    pub sieve_exhausted: bool,
    /// Every step leading to a "resolved" stage used exact values or valid bounds.
    pub certified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpecialClass {
    pub m_prime: u64,
    pub case_one: bool,
    /// Why the class is handled on its own.
    pub reason: &'static str,
    pub decomposition: MDecomposition,
    /// Least m = m′p^j (≥ m_min) from which the class form holds, with that form.
    pub threshold: Option<u64>,
    pub threshold_form: Option<FormOutcome>,
}

/// m lists after each stage for one case.
#[derive(Clone, Debug, Default, Serialize)]
pub struct CaseStats {
    pub after_forms: Vec<u64>,
    pub after_d1: Vec<u64>,
    pub after_suff: Vec<u64>,
    pub after_sieve: Vec<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SmallKReport {
    pub k: u32,
    pub q: u64,
    /// Least M with the relaxed δ-form (generic δ) holding on [M, scan_limit].
    pub generic_threshold: Option<u64>,
    /// The δ-form's derivative in m is positive at scan_limit, covering all larger m.
    pub tail_increasing: bool,
    pub delta_verify_limit: u64,
    pub special_classes: Vec<SpecialClass>,
    /// Classes where the exact or sieve δ exceeds the published case bound.
    pub lemma_discrepancies: Vec<MDecomposition>,
    pub instances: Vec<InstanceVerdict>,
    pub case_one: CaseStats,
    pub case_two: CaseStats,
    pub exceptions: Vec<u64>,
    pub unresolved: Vec<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LargeKRow {
    pub k: u32,
    pub nu: f64,
    pub m_k: Option<u64>,
    pub candidates: Vec<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LargeKReport {
    pub k_range: (u32, u32),
    pub rows: Vec<LargeKRow>,
    pub candidate_count: usize,
    pub candidates: Vec<InstanceVerdict>,
    pub all_certified: bool,
    pub exceptions: Vec<(u32, u64)>,
    pub unresolved: Vec<(u32, u64)>,
    pub reference_count: u64,
    pub count_difference: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairDiff {
    pub q: u64,
    pub m: u64,
    /// Stage at which the pipeline settled the pair.
    pub stage: Option<Stage>,
    pub in_reference: bool,
    pub nominated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub config: PipelineConfig,
    pub small_k: Vec<SmallKReport>,
    pub large_k: Option<LargeKReport>,
    pub computed_exceptions: Vec<(u64, u64)>,
    pub unresolved: Vec<(u64, u64)>,
    pub common: Vec<(u64, u64)>,
    /// Reference pairs the pipeline resolved.
    pub missing: Vec<PairDiff>,
    /// Computed pairs not in the reference list.
    pub extra: Vec<PairDiff>,
}

/// D(ν) for every ν of a grid.
pub struct NuGrid {
    params: Vec<WBoundParams>,
}

impl NuGrid {
    pub fn new(p: u64, grid: &[f64], cache: &mut DCache) -> Result<Self> {
        Ok(NuGrid { params: grid.iter().map(|&nu| cache.get(nu, p)).collect::<Result<_>>()? })
    }

    /// Evaluation with the largest margin over the grid.
    pub fn best(&self, inst: &PairInstance, variant: Variant, inputs: &VariantInputs) -> Result<CriterionReport> {
        let mut best: Option<CriterionReport> = None;
        for d in &self.params {
            let inputs = VariantInputs { d: Some(d.clone()), ..inputs.clone() };
            let r = variant_check(inst, variant, &inputs)?;
            let better = best
                .as_ref()
                .is_none_or(|b| r.lhs_log10 - r.rhs_log10 > b.lhs_log10 - b.rhs_log10);
            if better {
                best = Some(r);
            }
        }
        Ok(best.expect("nonempty grid"))
    }
}

fn p_free(p: u64, mut m: u64) -> (u64, u32) {
    let mut j = 0;
    while m % p == 0 {
        m /= p;
        j += 1;
    }
    (m, j)
}

/// The closed form valid for a class: m′-form when m′ | q² − 1, else the δ-form with
/// the sieve δ and weight m′ (d = q^m − 1 and g = factors of degree below e, Λ ≤ 2m′).
fn class_form(grid: &NuGrid, inst: &PairInstance, dec: &MDecomposition) -> Result<CriterionReport> {
    if dec.divides_q2_minus_1 {
        let inputs = VariantInputs { m_prime: Some(dec.m_prime), ..Default::default() };
        grid.best(inst, Variant::MprimeForm, &inputs)
    } else {
        let inputs = VariantInputs {
            m_prime: Some(dec.m_prime),
            delta: Some(dec.delta_sieve.clone()),
            delta_scale: DeltaScale::Unrelaxed,
            ..Default::default()
        };
        grid.best(inst, Variant::DeltaForm, &inputs)
    }
}

struct Ctx<'a> {
    cfg: &'a PipelineConfig,
    grid: &'a NuGrid,
    factorizer: &'a Factorizer,
}

/// Per-m cascade after the closed forms: D1, SUFF, sieve.
fn cascade(
    ctx: &Ctx,
    inst: PairInstance,
    dec: &MDecomposition,
    mut forms: Vec<FormOutcome>,
    d1: Option<&WBoundParams>,
) -> Result<InstanceVerdict> {
    let q = inst.q_u64().unwrap_or(0);
    let mut v = InstanceVerdict {
        q,
        k: inst.k,
        m: inst.m,
        m_prime: dec.m_prime,
        j: dec.j,
        case_one: dec.divides_q2_minus_1,
        stage: Stage::Unresolved,
        forms: Vec::new(),
        factorization: None,
        w_qm_log2: None,
        w_qm_exact: None,
        suff_verdict: None,
        sieve: None,
        sieve_evaluations: 0,
        sieve_exhausted: false,
        certified: false,
    };
    let inputs = VariantInputs { w_xm_exponent: Some(dec.big_m_prime), ..Default::default() };
    let d1r = match d1 {
        Some(d) => variant_check(&inst, Variant::D1Form, &VariantInputs { d: Some(d.clone()), ..inputs })?,
        None => ctx.grid.best(&inst, Variant::D1Form, &inputs)?,
    };
    forms.push(FormOutcome::from(&d1r));
    v.forms = forms;
    if d1r.holds {
        v.stage = Stage::D1Form;
        v.certified = true;
        return Ok(v);
    }
    let f = ctx.factorizer.factor_qm_minus_1(inst.p, inst.k as u64, inst.m)?;
    v.factorization = Some(f.provenance());
    let (w, exact) = w_qm(&f, ctx.factorizer)?;
    v.w_qm_log2 = Some(w.bits() - 1);
    v.w_qm_exact = Some(exact);
    let w_xm = BigUint::one() << dec.big_m_prime as usize;
    let winput = if exact { WInput::exact(w) } else { WInput::bound(w) };
    let s = suff_check(&inst, &winput, &w_xm);
    v.suff_verdict = Some(s.verdict);
    if s.holds {
        v.stage = Stage::Suff;
        v.certified = true;
        return Ok(v);
    }
    let cyclo = cyclotomic_structure(inst.p, inst.k, inst.m)?;
    let mut setup = SieveSetup::new(inst, &f, &cyclo, &ctx.factorizer.trial_bound())?;
    setup.l_formula = ctx.cfg.l_formula;
    let res = sieve_search(&setup, ctx.cfg.sieve_budget);
    v.sieve_evaluations = res.evaluations;
    v.sieve_exhausted = res.exhausted;
    match res.found {
        Some(ev) => {
            v.stage = Stage::Sieve;
            v.certified = ev.certified;
            v.sieve = Some(ev);
        }
        None => {
            v.stage = if f.is_complete() { Stage::Exception } else { Stage::Unresolved };
            v.certified = f.is_complete();
        }
    }
    Ok(v)
}

fn w_qm(f: &IntFactorization, fz: &Factorizer) -> Result<(BigUint, bool)> {
    if f.is_complete() {
        Ok((big_w(f)?, true))
    } else {
        Ok((w_upper_bound(f, &fz.trial_bound())?, false))
    }
}

fn relaxed_generic(cfg: &PipelineConfig, d: &WBoundParams, q_inst: PairInstance) -> Result<CriterionReport> {
    let inputs = VariantInputs {
        d: Some(d.clone()),
        delta: Some(cfg.delta_generic.clone()),
        delta_scale: DeltaScale::Relaxed,
        ..Default::default()
    };
    variant_check(&q_inst, Variant::DeltaForm, &inputs)
}

pub fn small_k_stage(cfg: &PipelineConfig, k: u32, grid: &NuGrid, cache: &mut DCache, fz: &Factorizer) -> Result<SmallKReport> {
    let p = cfg.p;
    let q = p.pow(k);
    let n = cfg.n;
    let inst = |m| PairInstance::new(p, k, m, n);
    let dnu = cache.get(cfg.delta_nu, p)?;
    let generic_threshold = least_threshold(cfg.m_min, cfg.scan_limit, |m| {
        relaxed_generic(cfg, &dnu, inst(m)).map(|r| r.holds).unwrap_or(false)
    });
    let lq = k as f64 * (p as f64).log10();
    let delta = cfg.delta_generic.to_f64().unwrap();
    let slope = lq * (0.5 - 2.0 / cfg.delta_nu)
        - 2.0 * delta * std::f64::consts::LOG10_2
        - 1.0 / (cfg.scan_limit as f64 * std::f64::consts::LN_10);
    let tail_increasing = slope > 0.0;
    let m_gen = generic_threshold.unwrap_or(cfg.scan_limit + 1);

    // classes handled on their own: m′ | q² − 1, and m′ whose sieve δ exceeds the generic δ
    let q2m1 = q * q - 1;
    let mut classes: Vec<(u64, &'static str)> =
        divisors_u64(q2m1).into_iter().map(|d| (d, "divides q^2-1")).collect();
    let mut lemma_discrepancies = Vec::new();
    let checked: Vec<MDecomposition> = (2..=cfg.delta_verify_limit)
        .into_par_iter()
        .filter(|mp| mp % p != 0 && q2m1 % mp != 0)
        .map(|mp| delta_compute(p, k, mp))
        .collect::<Result<_>>()?;
    for dec in checked {
        if dec.delta_sieve > cfg.delta_generic {
            classes.push((dec.m_prime, "sieve delta above generic delta"));
        }
        if dec.exact_exceeds_lemma || dec.sieve_exceeds_lemma {
            lemma_discrepancies.push(dec);
        }
    }
    let class_set: BTreeSet<u64> = classes.iter().map(|c| c.0).collect();

    let mut todo: Vec<u64> = Vec::new();
    let mut special_classes = Vec::new();
    for &(mp, reason) in &classes {
        let dec = delta_compute(p, k, mp)?;
        let mut threshold = None;
        let mut threshold_form = None;
        let mut m = mp;
        while m <= cfg.scan_limit.max(m_gen) {
            if m >= cfg.m_min {
                let r = class_form(grid, &inst(m), &dec)?;
                if r.holds {
                    threshold = Some(m);
                    threshold_form = Some(FormOutcome::from(&r));
                    break;
                }
                todo.push(m);
            }
            m *= p;
        }
        special_classes.push(SpecialClass {
            m_prime: mp,
            case_one: dec.divides_q2_minus_1,
            reason,
            decomposition: dec,
            threshold,
            threshold_form,
        });
    }
    for m in cfg.m_min..m_gen {
        if !class_set.contains(&p_free(p, m).0) {
            todo.push(m);
        }
    }
    todo.sort_unstable();
    todo.dedup();

    let ctx = Ctx { cfg, grid, factorizer: fz };
    let instances: Vec<InstanceVerdict> = todo
        .par_iter()
        .map(|&m| {
            let dec = delta_compute(p, k, m)?;
            let r = class_form(grid, &inst(m), &dec)?;
            let form = FormOutcome::from(&r);
            if r.holds {
                let stage = if dec.divides_q2_minus_1 { Stage::MprimeForm } else { Stage::DeltaForm };
                return Ok(InstanceVerdict {
                    q,
                    k,
                    m,
                    m_prime: dec.m_prime,
                    j: dec.j,
                    case_one: dec.divides_q2_minus_1,
                    stage,
                    forms: vec![form],
                    factorization: None,
                    w_qm_log2: None,
                    w_qm_exact: None,
                    suff_verdict: None,
                    sieve: None,
                    sieve_evaluations: 0,
                    sieve_exhausted: false,
                    certified: true,
                });
            }
            cascade(&ctx, inst(m), &dec, vec![form], None)
        })
        .collect::<Result<_>>()?;

    let mut case_one = CaseStats::default();
    let mut case_two = CaseStats::default();
    let mut exceptions = Vec::new();
    let mut unresolved = Vec::new();
    for v in &instances {
        let st = if v.case_one { &mut case_one } else { &mut case_two };
        if v.stage > Stage::DeltaForm {
            st.after_forms.push(v.m);
        }
        if v.stage > Stage::D1Form {
            st.after_d1.push(v.m);
        }
        if v.stage > Stage::Suff {
            st.after_suff.push(v.m);
        }
        if v.stage > Stage::Sieve {
            st.after_sieve.push(v.m);
        }
        match v.stage {
            Stage::Exception => exceptions.push(v.m),
            Stage::Unresolved => unresolved.push(v.m),
            _ => {}
        }
    }
    Ok(SmallKReport {
        k,
        q,
        generic_threshold,
        tail_increasing,
        delta_verify_limit: cfg.delta_verify_limit,
        special_classes,
        lemma_discrepancies,
        instances,
        case_one,
        case_two,
        exceptions,
        unresolved,
    })
}

/// k in the large range: m_k per schedule row, candidates m_min ≤ m < m_k failing D1
/// at the row's ν, each candidate then certified through SUFF or the sieve.
pub fn large_k_stage(cfg: &PipelineConfig, cache: &mut DCache, fz: &Factorizer) -> Result<LargeKReport> {
    let (k_lo, k_hi) = cfg.large_k.unwrap_or((3, 47));
    let p = cfg.p;
    let mut rows = Vec::new();
    let mut jobs = Vec::new();
    for k in k_lo..=k_hi {
        let Some(row) = cfg.nu_schedule.iter().find(|r| r.k_lo <= k && k <= r.k_hi) else {
            rows.push(LargeKRow { k, nu: f64::NAN, m_k: None, candidates: Vec::new() });
            continue;
        };
        let d = cache.get(row.nu, p)?;
        let (m_k, _) = d_form_min_m(p, row.k_lo, cfg.n, &d);
        let mut cands = Vec::new();
        for m in cfg.m_min..m_k.unwrap_or(cfg.scan_limit) {
            let inst = PairInstance::new(p, k, m, cfg.n);
            let dec = delta_compute(p, k, m)?;
            let inputs = VariantInputs {
                d: Some(d.clone()),
                w_xm_exponent: Some(dec.big_m_prime),
                ..Default::default()
            };
            if !variant_check(&inst, Variant::D1Form, &inputs)?.holds {
                cands.push(m);
                jobs.push((k, m, d.clone()));
            }
        }
        rows.push(LargeKRow { k, nu: row.nu, m_k, candidates: cands });
    }
    let grid = NuGrid { params: Vec::new() };
    let ctx = Ctx { cfg, grid: &grid, factorizer: fz };
    let candidates: Vec<InstanceVerdict> = jobs
        .par_iter()
        .map(|(k, m, d)| {
            let dec = delta_compute(p, *k, *m)?;
            cascade(&ctx, PairInstance::new(p, *k, *m, cfg.n), &dec, Vec::new(), Some(d))
        })
        .collect::<Result<_>>()?;
    let exceptions = candidates.iter().filter(|v| v.stage == Stage::Exception).map(|v| (v.k, v.m)).collect();
    let unresolved = candidates.iter().filter(|v| v.stage == Stage::Unresolved).map(|v| (v.k, v.m)).collect();
    let reference_count = reference().large_k_candidate_count;
    Ok(LargeKReport {
        k_range: (k_lo, k_hi),
        candidate_count: candidates.len(),
        all_certified: candidates.iter().all(|v| v.certified),
        rows,
        candidates,
        exceptions,
        unresolved,
        reference_count,
        count_difference: jobs.len() as i64 - reference_count as i64,
    })
}

/// Runs every stage; each stage factors with its own effort from `cfg`.
pub fn exceptions_pipeline(cfg: &PipelineConfig, table: Option<Arc<FactorTable>>) -> Result<PipelineReport> {
    let fz = Factorizer::new(cfg.effort.clone(), table.clone());
    let fz = &fz;
    let mut cache = DCache::default();
    let grid = NuGrid::new(cfg.p, &cfg.nu_grid, &mut cache)?;
    let small_k = cfg
        .small_k
        .iter()
        .map(|&k| small_k_stage(cfg, k, &grid, &mut cache, fz))
        .collect::<Result<Vec<_>>>()?;
    let large_k = match cfg.large_k {
        Some(_) => {
            let large = Factorizer::new(cfg.large_k_effort.clone(), table);
            Some(large_k_stage(cfg, &mut cache, &large)?)
        }
        None => None,
    };
    Ok(assemble(cfg.clone(), small_k, large_k))
}

/// Builds the exception diff against the reference list.
pub fn assemble(config: PipelineConfig, small_k: Vec<SmallKReport>, large_k: Option<LargeKReport>) -> PipelineReport {
    let r = reference();
    let refset: BTreeSet<(u64, u64)> = r.exception_pairs.iter().copied().collect();
    let nominated: BTreeSet<(u64, u64)> = r.nominated_pairs.iter().copied().collect();
    let mut computed = BTreeSet::new();
    let mut unresolved = BTreeSet::new();
    for rep in &small_k {
        computed.extend(rep.exceptions.iter().map(|&m| (rep.q, m)));
        unresolved.extend(rep.unresolved.iter().map(|&m| (rep.q, m)));
    }
    let stage_of = |q: u64, m: u64| -> Option<Stage> {
        let rep = small_k.iter().find(|r| r.q == q)?;
        if let Some(v) = rep.instances.iter().find(|v| v.m == m) {
            return Some(v.stage);
        }
        let (mp, _) = p_free(config.p, m);
        if rep.special_classes.iter().any(|c| c.m_prime == mp && c.threshold.is_some_and(|t| m >= t)) {
            return Some(if rep.special_classes.iter().any(|c| c.m_prime == mp && c.case_one) {
                Stage::MprimeForm
            } else {
                Stage::DeltaForm
            });
        }
        rep.generic_threshold.filter(|&t| m >= t).map(|_| Stage::DeltaForm)
    };
    let common = computed.intersection(&refset).copied().collect();
    let missing = refset
        .difference(&computed)
        .filter(|pair| small_k.iter().any(|r| r.q == pair.0))
        .map(|&(q, m)| PairDiff { q, m, stage: stage_of(q, m), in_reference: true, nominated: nominated.contains(&(q, m)) })
        .collect();
    let extra = computed
        .difference(&refset)
        .map(|&(q, m)| PairDiff { q, m, stage: stage_of(q, m), in_reference: false, nominated: nominated.contains(&(q, m)) })
        .collect();
    PipelineReport {
        config,
        small_k,
        large_k,
        computed_exceptions: computed.into_iter().collect(),
        unresolved: unresolved.into_iter().collect(),
        common,
        missing,
        extra,
    }
}
