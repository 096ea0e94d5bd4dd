use num_bigint::BigUint;
use pnpair::criteria::{sieve_search, suff_check, PairInstance, SieveSetup, WInput};
use pnpair::ffield::{make_context, Field, FieldContext};
use pnpair::numtheory::{big_w, divisors_u64, factor_qm_minus_1, FactorEffort};
use pnpair::oracle::*;
use pnpair::polyalg::{cyclotomic_factorization, Poly};
use pnpair::ratfunc::{check_membership, reduce, RationalFunction};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scan(p: u64, k: u32, m: u32) -> ScanField {
    ScanField::new(&make_context(p, k, m, 0).unwrap(), DEFAULT_SCAN_LIMIT).unwrap()
}

fn squarefree(n: u64) -> bool {
    pnpair::numtheory::factor_u64(n).iter().all(|&(_, e)| e == 1)
}

#[test]
fn count_identities_up_to_5_6() {
    for (p, k, m) in [(2, 1, 4), (2, 1, 6), (3, 1, 4), (5, 1, 2), (5, 1, 3), (5, 1, 4), (5, 2, 2), (5, 2, 3), (5, 1, 6)] {
        let sf = scan(p, k, m);
        let n = sf.size();
        let q = sf.context().q() as u64;
        for e in divisors_u64(n - 1).into_iter().filter(|&e| squarefree(e)) {
            let spec = FreenessSpec::new(&sf, e, &[]).unwrap();
            let count = (1..n).filter(|&i| sf.is_e_free_index(i, &spec)).count() as u64;
            let theta: f64 = spec.e_primes.iter().map(|&l| 1.0 - 1.0 / l as f64).product();
            assert_eq!(count as f64, (theta * (n - 1) as f64).round(), "({p},{k},{m}) e={e}");
        }
        let r = sf.factors().len();
        for mask in 0u32..1 << r {
            let idx: Vec<usize> = (0..r).filter(|b| mask >> b & 1 == 1).collect();
            let spec = FreenessSpec::new(&sf, 1, &idx).unwrap();
            let count = (0..n).filter(|&i| sf.is_g_free_index(i, &spec)).count() as u64;
            let expect: u64 = idx.iter().map(|&i| q.pow(sf.factors()[i].deg() as u32) - 1).product::<u64>()
                * n
                / idx.iter().map(|&i| q.pow(sf.factors()[i].deg() as u32)).product::<u64>();
            assert_eq!(count, expect, "({p},{k},{m}) g mask {mask}");
        }
        for a in 0..q as u32 {
            assert_eq!((0..n).filter(|&i| sf.trace_index(i) == a).count() as u64, n / q);
        }
    }
}

#[test]
fn primitive_count_f25() {
    let sf = scan(5, 1, 2);
    let full = FreenessSpec::full(&sf);
    assert_eq!((1..25).filter(|&i| sf.is_e_free_index(i, &full)).count(), 8);
    let ctx = sf.context();
    assert!(is_primitive(ctx, ctx.generator().unwrap()).unwrap());
    assert!(!is_normal(ctx, &ctx.zero()).unwrap());
}

#[test]
fn pointwise_character_identities() {
    for (p, k, m) in [(2, 1, 4), (5, 1, 3), (5, 2, 2)] {
        let sf = scan(p, k, m);
        let cs = CharacterSystem::new(&sf).unwrap();
        let full = FreenessSpec::full(&sf);
        let r = sf.factors().len();
        let subsets: Vec<FreenessSpec> = (0u32..1 << r)
            .map(|mask| FreenessSpec::new(&sf, 1, &(0..r).filter(|b| mask >> b & 1 == 1).collect::<Vec<_>>()).unwrap())
            .collect();
        let es: Vec<FreenessSpec> = divisors_u64(sf.group_order())
            .into_iter()
            .map(|e| FreenessSpec::new(&sf, e, &[]).unwrap())
            .collect();
        for i in 0..sf.size() {
            if i != 0 {
                for e in &es {
                    assert_eq!(cs.rho(i, e).unwrap().value, sf.is_e_free_index(i, e) as i64);
                }
            }
            for g in &subsets {
                assert_eq!(cs.eta(i, g).unwrap().value, sf.is_g_free_index(i, g) as i64);
            }
            for a in 0..sf.context().q() {
                assert_eq!(cs.tau(i, a).unwrap().value, (sf.trace_index(i) == a) as i64);
            }
            let _ = &full;
        }
        assert!(cs.rho(0, &full).is_err());
    }
}

#[test]
fn additive_character_is_a_homomorphism() {
    let sf = scan(5, 1, 3);
    let cs = CharacterSystem::new(&sf).unwrap();
    let ctx = sf.context();
    for i in (0..125).step_by(7) {
        for j in (0..125).step_by(11) {
            let s = ctx.index(&ctx.add(&sf.element(i), &sf.element(j)));
            let lhs = cs.canonical_additive(s);
            let rhs = cs.canonical_additive(i) * cs.canonical_additive(j);
            assert!((lhs - rhs).norm() < 1e-9);
        }
    }
}

fn random_rf(ctx: &FieldContext, rng: &mut ChaCha8Rng, max_sum: usize) -> RationalFunction {
    use rand::Rng;
    loop {
        let d1 = rng.gen_range(0..=max_sum);
        let d2 = rng.gen_range(0..=max_sum - d1);
        let mk = |d: usize, rng: &mut ChaCha8Rng| {
            let mut c: Vec<_> = (0..d).map(|_| ctx.random(rng)).collect();
            c.push(ctx.one());
            Poly::new(ctx.clone(), c)
        };
        let num = mk(d1, rng);
        let den = mk(d2, rng);
        if let Ok(f) = reduce(&num, &den) {
            if f.n() > 0 {
                return f;
            }
        }
    }
}

#[test]
fn weil_bound_on_random_functions() {
    let sf = scan(5, 1, 3);
    let cs = CharacterSystem::new(&sf).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let orders: Vec<u64> = divisors_u64(124).into_iter().filter(|&d| d > 1 && squarefree(d)).collect();
    let mut applicable = 0;
    for _ in 0..20 {
        let f = random_rf(sf.context(), &mut rng, 4);
        for &d in &orders {
            for chi in cs.chars_of_order(d).unwrap() {
                let r = weil_sum_check(&cs, &f, chi).unwrap();
                if r.status == SumStatus::Applicable {
                    applicable += 1;
                    assert_eq!(r.pass, Some(true), "{r:?}");
                }
            }
        }
    }
    assert!(applicable > 100);
}

#[test]
fn castro_bound_on_seeded_corpus() {
    let sf = scan(5, 1, 3);
    let cs = CharacterSystem::new(&sf).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    for _ in 0..12 {
        let f = random_rf(sf.context(), &mut rng, 3);
        let g = random_rf(sf.context(), &mut rng, 3);
        for d in [2u64, 31, 62] {
            let chi = cs.chars_of_order(d).unwrap()[0];
            for beta in [1u64, 17, 99] {
                let r = castro_sum_check(&cs, &f, &g, chi, beta).unwrap();
                if r.status == SumStatus::Applicable {
                    checked += 1;
                    assert_eq!(r.pass, Some(true), "{r:?}");
                }
            }
        }
    }
    assert!(checked > 50);
    // polynomial g: no finite poles, so l1 = 1 and l2 = 0
    let x = RationalFunction::parse(sf.context(), "x^2+3").unwrap();
    let g = RationalFunction::parse(sf.context(), "x^2+x").unwrap();
    let r = castro_sum_check(&cs, &x, &g, MultChar { d: 2, s: 1 }, 3).unwrap();
    assert_eq!(r.parameters["l1"], 1);
    assert_eq!(r.parameters["l2"], 0);
    assert!((r.bound - 3.0 * 125f64.sqrt()).abs() < 1e-9);
    assert_eq!(r.pass, Some(true));
}

#[test]
fn witnesses_reverify() {
    let sf = scan(2, 1, 6);
    let f = RationalFunction::parse(sf.context(), "(x^3+x+1)/x").unwrap();
    let full = FreenessSpec::full(&sf);
    let table = count_pairs_table(&sf, &f, &full, &full).unwrap();
    let total = table.get(None, None).unwrap();
    let cells: u64 = table.cells().iter().map(|c| c.count).sum();
    assert_eq!(total.count, cells);
    for c in table.cells() {
        match &c.witness {
            Some(w) => assert!(verify_witness(&sf, &f, w, c.a, c.b, &full, &full).unwrap().ok),
            None => assert_eq!(c.count, 0),
        }
    }
}

/// Normal elements have nonzero trace since (x − 1) | x^m − 1, so a = 0 or b = 0 is never attained.
#[test]
fn zero_trace_is_never_attained() {
    let sf = scan(5, 1, 4);
    let f = RationalFunction::parse(sf.context(), "(x^3+x+1)/(x+2)").unwrap();
    let full = FreenessSpec::full(&sf);
    let table = count_pairs_table(&sf, &f, &full, &full).unwrap();
    assert_eq!(table.get(Some(0), None).unwrap().count, 0);
    assert_eq!(table.get(None, Some(0)).unwrap().count, 0);
}

/// Whenever SUFF or the sieve certifies a brute-forceable instance, every nonzero
/// trace pair must actually be attained.
#[test]
fn criteria_verdicts_are_sound_on_small_fields() {
    let effort = FactorEffort::default();
    let mut certified = 0;
    for (p, k, m) in [(5u64, 1u32, 5u32), (5, 1, 6), (5, 2, 3), (2, 1, 6), (3, 1, 6), (5, 1, 9)] {
        let sf = scan(p, k, m);
        let ctx = sf.context();
        let f = RationalFunction::parse(ctx, "(x^3+x+1)/(x+2)").unwrap();
        let qm1 = factor_qm_minus_1(p, k as u64, m as u64, None, &effort).unwrap();
        if !check_membership(&f, &qm1).unwrap().in_rn {
            continue;
        }
        let inst = PairInstance::new(p, k, m as u64, f.n() as u64);
        let cyclo = cyclotomic_factorization(ctx.base(), m as u64, u64::MAX).unwrap();
        let w_xm = BigUint::from(2u32).pow(cyclo.distinct_count() as u32);
        let suff = suff_check(&inst, &WInput::exact(big_w(&qm1).unwrap()), &w_xm);
        let setup = SieveSetup::new(inst, &qm1, &cyclo, &effort_bound()).unwrap();
        let sieve = sieve_search(&setup, 10_000);
        if suff.holds || sieve.found.is_some() {
            certified += 1;
            let full = FreenessSpec::full(&sf);
            let table = count_pairs_table(&sf, &f, &full, &full).unwrap();
            for a in 1..ctx.q() {
                for b in 1..ctx.q() {
                    assert!(table.get(Some(a), Some(b)).unwrap().count > 0, "({p},{k},{m}) a={a} b={b}");
                }
            }
        }
    }
    eprintln!("certified small instances: {certified}");
}

fn effort_bound() -> BigUint {
    BigUint::from(FactorEffort::default().trial_bound)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normality_is_frobenius_invariant(i in 0u64..625) {
        let ctx = make_context(5, 1, 4, 0).unwrap();
        let x = ctx.from_index(i);
        prop_assert_eq!(is_normal(&ctx, &x).unwrap(), is_normal(&ctx, &ctx.frobenius(&x, 1)).unwrap());
        prop_assert_eq!(is_normal(&ctx, &x).unwrap(), is_normal_by_rank(&ctx, &x));
    }

    #[test]
    fn primitivity_is_inversion_invariant(i in 1u64..625) {
        let ctx = make_context(5, 1, 4, 0).unwrap();
        let x = ctx.from_index(i);
        prop_assert_eq!(is_primitive(&ctx, &x).unwrap(), is_primitive(&ctx, &ctx.inv(&x).unwrap()).unwrap());
    }
}
