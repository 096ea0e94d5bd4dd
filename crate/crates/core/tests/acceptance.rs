//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria that the published numbers cannot meet are reported red with the
//! computed values; the process only exits nonzero on an operational error.

use num_bigint::BigUint;
use num_rational::BigRational;
use pnpair::criteria::reference::reference;
use pnpair::criteria::{
    d_form_min_k, default_nu_schedule, exceptions_pipeline, least_threshold, sieve_search, suff_check,
    threshold_rows, sieve_row_reproduce, DCache, DeltaScale, LFormula, PairInstance, PipelineConfig,
    PipelineReport, SieveSetup, Variant, VariantInputs, WInput, variant_check,
};
use pnpair::ffield::{make_context, Field, FieldContext};
use pnpair::numtheory::primes::primes_up_to;
use pnpair::numtheory::{big_w, compute_d, divisors_u64, factor_qm_minus_1, factor_u64, FactorEffort, Factorizer};
use pnpair::oracle::{
    castro_sum_check, count_pairs_table, verify_witness, weil_sum_check, CharacterSystem, FreenessSpec, ScanField,
    SumStatus, DEFAULT_SCAN_LIMIT,
};
use pnpair::polyalg::{cyclotomic_factorization, Poly};
use pnpair::ratfunc::{check_membership, reduce, RationalFunction};
use pnpair::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

const L_TOL: f64 = 0.005;
const LAMBDA_TOL: f64 = 0.05;
const CHAR_RESIDUAL: f64 = 1e-6;

struct Outcome {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

fn outcome(pass: bool, summary: impl Into<String>) -> Outcome {
    Outcome { pass, summary: summary.into(), details: Vec::new() }
}

fn squarefree(n: u64) -> bool {
    factor_u64(n).iter().all(|&(_, e)| e == 1)
}

fn sieve_table() -> Result<Outcome> {
    let fz = Factorizer::new(FactorEffort::default(), None);
    let mut ok = 0;
    let mut details = Vec::new();
    let rows = &reference().sieve_rows;
    for row in rows {
        let ev = sieve_row_reproduce(5, 4, row, &fz, LFormula::Symmetric)?;
        let lam = ev.lambda.unwrap_or(f64::NAN);
        let good = (ev.l_f64 - row.l).abs() <= L_TOL && (lam - row.lambda).abs() <= LAMBDA_TOL && ev.holds;
        ok += good as usize;
        if !good {
            details.push(format!(
                "({},{}): l {:.4} vs {}, L {:.3} vs {}, holds {}",
                row.q, row.m, ev.l_f64, row.l, lam, row.lambda, ev.holds
            ));
        }
    }
    let mut o = outcome(ok == rows.len(), format!("sieve table: {ok}/{} rows within l±{L_TOL}, L±{LAMBDA_TOL} and holding", rows.len()));
    o.details = details;
    Ok(o)
}

fn d_bound() -> Result<Outcome> {
    let d = compute_d(21.57, &[5])?;
    let mantissa = 10f64.powf(d.log10_d - d.log10_d.floor());
    let in_window = (4905.0..=4906.5).contains(&d.log10_d);
    let printed = reference().d_bound.mantissa;
    let consistent = d.log10_d.floor() as i32 == reference().d_bound.exponent && (mantissa - printed).abs() < 0.005;
    let d2 = compute_d(2.0, &[])?.d();
    let d2_ok = (d2 - 4.0 / 6f64.sqrt()).abs() < 1e-9;
    Ok(outcome(
        in_window && consistent && d2_ok,
        format!(
            "D bound: log10 D(21.57) = {:.4} (D = {mantissa:.4}e{}), D(2) - 4/sqrt6 = {:.1e}",
            d.log10_d,
            d.log10_d.floor(),
            d2 - 4.0 / 6f64.sqrt()
        ),
    ))
}

fn threshold_table() -> Result<Outcome> {
    let mut cache = DCache::default();
    let rows = threshold_rows(5, 4, &default_nu_schedule(), &mut cache)?;
    let printed = &reference().thresholds;
    let mut exact = 0;
    let mut within = 0;
    let mut details = Vec::new();
    for (row, p) in rows.iter().zip(printed) {
        let got = row.m_k.map(|v| v as i64).unwrap_or(-1);
        let diff = got - p.m_k as i64;
        exact += (diff == 0) as usize;
        within += (diff.abs() <= 1) as usize;
        if diff != 0 {
            details.push(format!("nu {} k {}..{}: m_k {got} vs {}", row.nu, row.k_lo, row.k_hi, p.m_k));
        }
    }
    let anchor = |k: u32| rows.iter().find(|r| r.k_lo == k).and_then(|r| r.m_k);
    let pass = within == rows.len() && exact >= 18 && anchor(3) == Some(520) && anchor(4) == Some(99);
    let mut o = outcome(
        pass,
        format!(
            "threshold table: {exact}/{} exact, {within}/{} within 1; anchors k=3 -> {:?}, k=4 -> {:?}",
            rows.len(),
            rows.len(),
            anchor(3),
            anchor(4)
        ),
    );
    o.details = details;
    Ok(o)
}

fn delta_threshold(delta: BigRational, scan_to: u64) -> Result<Option<u64>> {
    let d = compute_d(11.3, &[5])?;
    let inputs = VariantInputs {
        d: Some(d),
        delta: Some(delta),
        delta_scale: DeltaScale::Relaxed,
        ..VariantInputs::default()
    };
    let holds = |m: u64| {
        variant_check(&PairInstance::new(5, 1, m, 4), Variant::DeltaForm, &inputs)
            .map(|r| r.holds)
            .unwrap_or(false)
    };
    // least M holding on all of [M, scan_to]
    Ok(least_threshold(9, scan_to, holds))
}

fn anchors() -> Result<Outcome> {
    let d = compute_d(21.57, &[5])?;
    let k_min = d_form_min_k(5, 5, 4, &d);
    let inputs = VariantInputs { d: Some(d), ..VariantInputs::default() };
    let at = |k: u32| variant_check(&PairInstance::new(5, k, 5, 4), Variant::DForm, &inputs).map(|r| r.holds);
    let boundary = at(385_897)? && !at(385_896)?;
    let third = |a: i64, b: i64| BigRational::new(a.into(), b.into());
    let t13 = delta_threshold(third(1, 3), 20_000)?;
    let t38 = delta_threshold(third(3, 8), 20_000)?;
    let t38_half = delta_threshold(third(3, 16), 20_000)?;
    let near = |t: Option<u64>, want: u64| t.is_some_and(|v| v.abs_diff(want) <= 1);
    let pass = boundary && near(t13, 1566) && near(t38, 342);
    let mut o = outcome(
        pass,
        format!(
            "anchors: D-form k_min {k_min:?} (385897 holds, 385896 fails: {boundary}); delta 1/3 -> {t13:?}; delta 3/8 -> {t38:?}",
        ),
    );
    if !near(t38, 342) {
        o.details.push(format!(
            "delta 3/8 with exponent 2^(2m delta) has no threshold up to m = 20000; with 2^(m delta) it is {t38_half:?}"
        ));
    }
    Ok(o)
}

fn large_k(rep: &PipelineReport) -> Outcome {
    let Some(l) = &rep.large_k else { return outcome(false, "large-k stage did not run") };
    let n = l.candidate_count as u64;
    let pass = (198..=242).contains(&n) && l.all_certified;
    let mut o = outcome(
        pass,
        format!(
            "large k {}..{}: {n} candidates (reference {}, difference {}), all certified: {}",
            l.k_range.0, l.k_range.1, l.reference_count, l.count_difference, l.all_certified
        ),
    );
    let mut by_stage = std::collections::BTreeMap::new();
    for c in &l.candidates {
        *by_stage.entry(c.stage.name()).or_insert(0) += 1;
    }
    o.details.push(format!("settled by stage: {by_stage:?}"));
    o.details.push(format!(
        "diff: {}",
        serde_json::json!({ "computed": n, "reference": l.reference_count, "difference": l.count_difference })
    ));
    o
}

fn exception_list(rep: &PipelineReport) -> Outcome {
    let r = reference();
    let extras_nominated = rep.extra.iter().all(|e| e.nominated);
    let pass = rep.missing.is_empty() && extras_nominated && rep.unresolved.is_empty();
    let mut o = outcome(
        pass,
        format!(
            "exceptions k=1,2: {} computed, {}/{} reference pairs present, {} extra, {} unresolved",
            rep.computed_exceptions.len(),
            rep.common.len(),
            r.exception_pairs.len(),
            rep.extra.len(),
            rep.unresolved.len()
        ),
    );
    for m in &rep.missing {
        o.details.push(format!("missing ({},{}): settled at stage {:?}", m.q, m.m, m.stage.map(|s| s.name())));
    }
    for e in &rep.extra {
        o.details.push(format!(
            "extra ({},{}): stage {:?}, nominated {}",
            e.q,
            e.m,
            e.stage.map(|s| s.name()),
            e.nominated
        ));
    }
    o.details.push(format!("sieve budget per instance: {}", rep.config.sieve_budget));
    o
}

fn scan(p: u64, k: u32, m: u32) -> Result<ScanField> {
    ScanField::new(&make_context(p, k, m, 0)?, DEFAULT_SCAN_LIMIT)
}

fn g_subsets(sf: &ScanField) -> Result<Vec<FreenessSpec>> {
    let r = sf.factors().len();
    (0u32..1 << r)
        .map(|mask| FreenessSpec::new(sf, 1, &(0..r).filter(|b| mask >> b & 1 == 1).collect::<Vec<_>>()))
        .collect()
}

fn char_identities() -> Result<Outcome> {
    let mut mismatches = 0;
    let mut worst: f64 = 0.0;
    let mut evaluations = 0u64;
    for (p, k, m) in [(5, 1, 3), (2, 1, 6)] {
        let sf = scan(p, k, m)?;
        let cs = CharacterSystem::new(&sf)?;
        // freeness only depends on the radicals, so every divisor is covered by these
        let es: Vec<FreenessSpec> =
            divisors_u64(sf.group_order()).into_iter().map(|e| FreenessSpec::new(&sf, e, &[])).collect::<Result<_>>()?;
        let gs = g_subsets(&sf)?;
        for i in 0..sf.size() {
            if i != 0 {
                for e in &es {
                    let v = cs.rho(i, e)?;
                    worst = worst.max(v.residual);
                    mismatches += (v.value != sf.is_e_free_index(i, e) as i64) as usize;
                    evaluations += 1;
                }
            }
            for g in &gs {
                let v = cs.eta(i, g)?;
                worst = worst.max(v.residual);
                mismatches += (v.value != sf.is_g_free_index(i, g) as i64) as usize;
                evaluations += 1;
            }
            for a in 0..sf.context().q() {
                let v = cs.tau(i, a)?;
                worst = worst.max(v.residual);
                mismatches += (v.value != (sf.trace_index(i) == a) as i64) as usize;
                evaluations += 1;
            }
        }
    }
    Ok(outcome(
        mismatches == 0 && worst < CHAR_RESIDUAL,
        format!("character identities on F_5^3, F_2^6: {evaluations} evaluations, {mismatches} mismatches, max residual {worst:.2e}"),
    ))
}

fn count_identities() -> Result<Outcome> {
    let limit = 5u64.pow(6);
    let mut fields = 0;
    let mut failures = Vec::new();
    for p in primes_up_to(limit) {
        let mut q = p;
        let mut k = 1u32;
        while q <= limit {
            let mut qm = q;
            let mut m = 1u32;
            while qm <= limit {
                fields += 1;
                if let Some(f) = count_field(p, k, m)? {
                    failures.push(f);
                }
                qm = qm.saturating_mul(q);
                m += 1;
            }
            q *= p;
            k += 1;
        }
    }
    let mut o = outcome(failures.is_empty(), format!("count identities on all {fields} fields with q^m <= 5^6: {} failures", failures.len()));
    o.details = failures;
    Ok(o)
}

fn count_field(p: u64, k: u32, m: u32) -> Result<Option<String>> {
    let sf = scan(p, k, m)?;
    let n = sf.size();
    let q = sf.context().q() as u64;
    let mut traces = vec![0u64; q as usize];
    for i in 0..n {
        traces[sf.trace_index(i) as usize] += 1;
    }
    if traces.iter().any(|&c| c != n / q) {
        return Ok(Some(format!("({p},{k},{m}) trace fibers {traces:?}")));
    }
    for e in divisors_u64(n - 1).into_iter().filter(|&e| squarefree(e)) {
        let spec = FreenessSpec::new(&sf, e, &[])?;
        let count = (1..n).filter(|&i| sf.is_e_free_index(i, &spec)).count() as u64;
        // θ(e)(q^m − 1) = φ(rad e)/rad e · (q^m − 1), exact in integers
        let expect = (n - 1) / e * spec.e_primes.iter().map(|&l| l - 1).product::<u64>();
        if count != expect {
            return Ok(Some(format!("({p},{k},{m}) e={e}: {count} vs {expect}")));
        }
    }
    for spec in g_subsets(&sf)? {
        let count = (0..n).filter(|&i| sf.is_g_free_index(i, &spec)).count() as u64;
        let degs: Vec<u32> = spec.g_factors.iter().map(|&i| sf.factors()[i].deg() as u32).collect();
        let expect = n / degs.iter().map(|&d| q.pow(d)).product::<u64>() * degs.iter().map(|&d| q.pow(d) - 1).product::<u64>();
        if count != expect {
            return Ok(Some(format!("({p},{k},{m}) g={:?}: {count} vs {expect}", spec.g_factors)));
        }
    }
    Ok(None)
}

fn random_rf(ctx: &FieldContext, rng: &mut ChaCha8Rng, max_sum: usize) -> RationalFunction {
    loop {
        let d1 = rng.gen_range(0..=max_sum);
        let d2 = rng.gen_range(0..=max_sum - d1);
        let mk = |d: usize, rng: &mut ChaCha8Rng| {
            let mut c: Vec<_> = (0..d).map(|_| ctx.random(rng)).collect();
            c.push(ctx.one());
            Poly::new(ctx.clone(), c)
        };
        let (num, den) = (mk(d1, rng), mk(d2, rng));
        if let Ok(f) = reduce(&num, &den) {
            if f.n() > 0 {
                return f;
            }
        }
    }
}

fn bound_suite() -> Result<Outcome> {
    let mut details = Vec::new();
    let mut pass = true;
    for (p, k, m, seed) in [(5, 1, 2, 1u64), (5, 1, 3, 2), (2, 1, 6, 3)] {
        let sf = scan(p, k, m)?;
        let cs = CharacterSystem::new(&sf)?;
        let ctx = sf.context();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let orders: Vec<u64> = divisors_u64(sf.group_order()).into_iter().filter(|&d| d > 1 && squarefree(d)).collect();
        let (mut weil_fns, mut weil_checks, mut weil_fail) = (0, 0, 0);
        for _ in 0..20 {
            let f = random_rf(ctx, &mut rng, 4);
            let mut used = false;
            for &d in &orders {
                for chi in cs.chars_of_order(d)? {
                    let r = weil_sum_check(&cs, &f, chi)?;
                    if r.status == SumStatus::Applicable {
                        used = true;
                        weil_checks += 1;
                        weil_fail += (r.pass != Some(true)) as usize;
                    }
                }
            }
            weil_fns += used as usize;
        }
        let (mut mixed, mut mixed_fail, mut unverified) = (0, 0, 0);
        let betas: Vec<u64> = (1..sf.size()).step_by((sf.size() as usize / 4).max(1)).collect();
        while mixed < 20 {
            let f = random_rf(ctx, &mut rng, 2);
            let g = random_rf(ctx, &mut rng, 2);
            for &d in &orders {
                let chi = cs.chars_of_order(d)?[0];
                for &beta in &betas {
                    let r = castro_sum_check(&cs, &f, &g, chi, beta)?;
                    match r.status {
                        SumStatus::Applicable => {
                            mixed += 1;
                            mixed_fail += (r.pass != Some(true)) as usize;
                        }
                        SumStatus::HypothesisUnverified => unverified += 1,
                        SumStatus::Inapplicable => {}
                    }
                }
            }
        }
        let ok = weil_fns >= 20 && weil_fail == 0 && mixed >= 20 && mixed_fail == 0;
        pass &= ok;
        details.push(format!(
            "F_{p}^{m}: Weil {weil_checks} applicable sums over {weil_fns} functions, {weil_fail} violations; mixed {mixed} applicable, {mixed_fail} violations, {unverified} with unverified hypothesis"
        ));
    }
    let mut o = outcome(pass, "Weil and mixed bounds on F_5^2, F_5^3, F_2^6");
    o.details = details;
    Ok(o)
}

fn existence() -> Result<Outcome> {
    let mut details = Vec::new();
    let ctx = make_context(5, 1, 9, 0)?;
    let sf = ScanField::new(&ctx, DEFAULT_SCAN_LIMIT)?;
    let f = RationalFunction::parse(&ctx, "(x^3+x+1)/(x+2)")?;
    let membership = check_membership(&f, sf.qm1())?;
    let full = FreenessSpec::full(&sf);
    let table = count_pairs_table(&sf, &f, &full, &full)?;
    let mut verified = true;
    let mut attained = 0;
    let mut nonzero_attained = 0;
    for cell in table.cells() {
        if let Some(w) = &cell.witness {
            verified &= verify_witness(&sf, &f, w, cell.a, cell.b, &full, &full)?.ok;
            attained += 1;
            nonzero_attained += (cell.a != Some(0) && cell.b != Some(0)) as usize;
        }
    }
    details.push(format!(
        "(5,9): membership {}, {attained}/25 trace pairs attained, {nonzero_attained}/16 with nonzero traces (zero trace is impossible for normal elements), witnesses verified {verified}",
        membership.in_rn
    ));

    // small fields: any SUFF/sieve "holds" must be confirmed by the scan
    let effort = FactorEffort::default();
    let mut claimed = 0;
    let mut unsound = 0;
    let limit = 5u64.pow(6);
    for (p, k) in [(2u64, 1u32), (3, 1), (5, 1), (5, 2), (7, 1), (11, 1), (13, 1)] {
        let q = p.pow(k);
        let mut m = 1u32;
        while q.pow(m) <= limit {
            let sf = scan(p, k, m)?;
            let ctx = sf.context();
            let f = RationalFunction::parse(ctx, "(x^3+x+1)/(x+2)")?;
            let qm1 = factor_qm_minus_1(p, k as u64, m as u64, None, &effort)?;
            if f.n() > 0 && check_membership(&f, &qm1)?.in_rn {
                let inst = PairInstance::new(p, k, m as u64, f.n() as u64);
                let cyclo = cyclotomic_factorization(ctx.base(), m as u64, u64::MAX)?;
                let w_xm = BigUint::from(2u32).pow(cyclo.distinct_count() as u32);
                let suff = suff_check(&inst, &WInput::exact(big_w(&qm1)?), &w_xm).holds;
                let sieve = SieveSetup::new(inst, &qm1, &cyclo, &BigUint::from(effort.trial_bound))
                    .map(|s| sieve_search(&s, 10_000).found.is_some())
                    .unwrap_or(false);
                if suff || sieve {
                    claimed += 1;
                    let table = count_pairs_table(&sf, &f, &full_spec(&sf), &full_spec(&sf))?;
                    let all = (1..ctx.q()).all(|a| (1..ctx.q()).all(|b| table.get(Some(a), Some(b)).is_ok_and(|c| c.count > 0)));
                    unsound += (!all) as usize;
                }
            }
            m += 1;
        }
    }
    details.push(format!("small fields: {claimed} instances certified by SUFF or the sieve, {unsound} contradicted by the scan"));
    let pass = membership.in_rn && verified && unsound == 0;
    let mut o = outcome(pass, format!("existence scan (5,9) and small-field soundness: witnesses verified {verified}"));
    o.details = details;
    Ok(o)
}

fn full_spec(sf: &ScanField) -> FreenessSpec {
    FreenessSpec::full(sf)
}

fn main() {
    // libtest flags (e.g. --nocapture, filters) are accepted and ignored
    let start = Instant::now();
    let mut pipeline_small: Option<PipelineReport> = None;
    let mut pipeline_large: Option<PipelineReport> = None;
    let mut results: Vec<(u32, Result<Outcome>, f64)> = Vec::new();
    let mut timed = |id: u32, f: &mut dyn FnMut() -> Result<Outcome>| {
        let t = Instant::now();
        let r = f();
        results.push((id, r, t.elapsed().as_secs_f64()));
    };
    timed(1, &mut sieve_table);
    timed(2, &mut d_bound);
    timed(3, &mut threshold_table);
    timed(4, &mut anchors);
    timed(5, &mut || {
        let cfg = PipelineConfig { small_k: vec![], ..PipelineConfig::default() };
        let rep = exceptions_pipeline(&cfg, None)?;
        let o = large_k(&rep);
        pipeline_large = Some(rep);
        Ok(o)
    });
    timed(6, &mut || {
        let cfg = PipelineConfig { large_k: None, ..PipelineConfig::default() };
        let rep = exceptions_pipeline(&cfg, None)?;
        let o = exception_list(&rep);
        pipeline_small = Some(rep);
        Ok(o)
    });
    timed(7, &mut char_identities);
    timed(8, &mut count_identities);
    timed(9, &mut bound_suite);
    timed(10, &mut existence);

    let mut errors = 0;
    let mut passed = 0;
    println!();
    for (id, r, secs) in &results {
        match r {
            Ok(o) => {
                passed += o.pass as usize;
                println!("criterion {id:>2}: {} {} ({secs:.1}s)", if o.pass { "PASS" } else { "FAIL" }, o.summary);
                for d in &o.details {
                    println!("               {d}");
                }
            }
            Err(e) => {
                errors += 1;
                println!("criterion {id:>2}: ERROR {e} ({secs:.1}s)");
            }
        }
    }
    println!("acceptance: {passed}/{} pass, {errors} errors, {:.1}s total", results.len(), start.elapsed().as_secs_f64());
    drop((pipeline_small, pipeline_large));
    if errors > 0 {
        std::process::exit(1);
    }
}
