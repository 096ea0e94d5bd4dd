//! `pnpair`: batch front end emitting JSON-lines (or CSV/text) reports.
//!
//! Exit codes: 0 completed (negative verdicts included), 2 bad input,
//! 3 resource or budget exhausted, 4 internal integrity failure.

mod report;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use pnpair::criteria::{
    default_nu_schedule, exceptions_pipeline, reference::reference, sieve_search, suff_check, threshold_rows,
    sieve_row_reproduce, DCache, LFormula, PairInstance, PipelineConfig, SieveSetup, WInput,
};
use pnpair::ffield::{make_context, BaseField, Field, FieldContext};
use pnpair::numtheory::{big_w, w_upper_bound, FactorEffort, FactorTable, Factorizer, IntFactorization};
use pnpair::oracle::{
    castro_sum_check, count_pairs_table, verify_witness, weil_sum_check, CharacterSystem, FreenessSpec, MultChar,
    ScanField, DEFAULT_SCAN_LIMIT,
};
use pnpair::polyalg::cyclotomic_structure;
use pnpair::ratfunc::{check_membership, RationalFunction};
use pnpair::{Error, ErrorKind, Result};
use report::{Emitter, Format};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser, Debug, Clone, Serialize, Deserialize, PartialEq)]
#[command(name = "pnpair", version, about = "Primitive normal pairs with prescribed traces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Characteristic.
    #[arg(long, global = true, default_value_t = 5)]
    pub p: u64,
    /// q = p^k.
    #[arg(long, global = true, default_value_t = 1)]
    pub k: u32,
    /// Extension degree over F_q.
    #[arg(long, global = true)]
    pub m: Option<u64>,
    /// Degree sum of the rational function.
    #[arg(long, global = true, default_value_t = 4)]
    pub n: u64,
    /// Rational function, e.g. "(x^3+x+1)/(x+2)".
    #[arg(long, global = true, default_value = "(x^3+x+1)/(x+2)")]
    pub f: String,
    /// Second function for mixed character sums.
    #[arg(long, global = true)]
    pub g: Option<String>,
    /// Trace of ε; all values when omitted.
    #[arg(long, global = true)]
    pub a: Option<String>,
    /// Trace of f(ε); all values when omitted.
    #[arg(long, global = true)]
    pub b: Option<String>,
    /// Override ν for every threshold row (`--table 1`).
    #[arg(long, global = true)]
    pub nu: Option<f64>,
    /// Seeds field construction and factoring.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Factor table file or directory.
    #[arg(long, global = true, env = "PNPAIR_FACTOR_TABLES")]
    pub factor_tables: Option<String>,
    /// Largest q^m an exhaustive scan may touch.
    #[arg(long, global = true, default_value_t = DEFAULT_SCAN_LIMIT)]
    pub scan_limit: u64,
    /// light | default | heavy | TRIAL:RHO_ITERS:RHO_BITS
    #[arg(long, global = true, default_value = "default")]
    pub effort: String,
    /// Sieve search evaluation budget.
    #[arg(long, global = true, default_value_t = 200_000)]
    pub budget: u64,
    /// Which table to reproduce (both when omitted).
    #[arg(long, global = true)]
    pub table: Option<u8>,
    /// k range for the exceptions pipeline, "LO..HI".
    #[arg(long, global = true)]
    pub k_range: Option<String>,
    /// Multiplicative character order (all squarefree orders when omitted).
    #[arg(long, global = true)]
    pub d: Option<u64>,
    /// Index s of the character γ^l ↦ ζ_d^{sl}.
    #[arg(long, global = true, default_value_t = 1)]
    pub s: u64,
    /// Element index β of the additive character x ↦ ψ̂(βx).
    #[arg(long, global = true, default_value_t = 1)]
    pub beta: u64,
    /// Use the l formula with a single factor on the polynomial sum.
    #[arg(long, global = true, value_enum, default_value_t = LChoice::Symmetric)]
    pub l_formula: LChoice,
}

#[derive(Subcommand, Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Factor q^m − 1.
    Factor,
    /// Evaluate the basic sufficient condition.
    Suff,
    /// Search sieve parameters for one instance.
    Sieve,
    /// Reproduce the threshold table (1) and/or the sieve table (2) with diffs.
    Tables,
    /// Run the exception pipeline for q = p^k.
    Exceptions,
    /// Exhaustive existence check for (ε, f(ε)).
    Verify,
    /// Character sums against the Weil-type bounds.
    Charsum,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum LChoice {
    Symmetric,
    Printed,
}

impl From<LChoice> for LFormula {
    fn from(c: LChoice) -> Self {
        match c {
            LChoice::Symmetric => LFormula::Symmetric,
            LChoice::Printed => LFormula::Printed,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pnpair: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Input => 2,
                ErrorKind::Resource => 3,
                ErrorKind::Integrity => 4,
            })
        }
    }
}

fn input(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(input("--jobs must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| input(format!("thread pool: {e}")))?;
    }
    let mut out = Emitter::new(cli, std::io::stdout().lock());
    match cli.command {
        Command::Factor => cmd_factor(cli, &mut out),
        Command::Suff => cmd_suff(cli, &mut out),
        Command::Sieve => cmd_sieve(cli, &mut out),
        Command::Tables => cmd_tables(cli, &mut out),
        Command::Exceptions => cmd_exceptions(cli, &mut out),
        Command::Verify => cmd_verify(cli, &mut out),
        Command::Charsum => cmd_charsum(cli, &mut out),
    }?;
    out.finish()
}

fn need_m(cli: &Cli) -> Result<u64> {
    match cli.m {
        Some(m) if m > 0 => Ok(m),
        Some(_) => Err(input("--m must be positive")),
        None => Err(input("--m is required")),
    }
}

fn effort(cli: &Cli) -> Result<FactorEffort> {
    let base = FactorEffort { seed: FactorEffort::default().seed ^ cli.seed, ..FactorEffort::default() };
    Ok(match cli.effort.as_str() {
        "default" => base,
        "light" => FactorEffort { rho_iterations: 1 << 14, rho_max_bits: 160, ..base },
        "heavy" => FactorEffort { rho_iterations: 1 << 24, rho_max_bits: 400, ..base },
        s => {
            let parts: Vec<&str> = s.split(':').collect();
            let num = |t: &str| t.parse::<u64>().map_err(|_| input(format!("bad --effort value {s:?}")));
            if parts.len() != 3 {
                return Err(input(format!("bad --effort value {s:?}")));
            }
            FactorEffort {
                trial_bound: num(parts[0])?,
                rho_iterations: num(parts[1])?,
                rho_max_bits: num(parts[2])?,
                ..base
            }
        }
    })
}

fn factor_table(cli: &Cli) -> Result<Option<Arc<FactorTable>>> {
    match &cli.factor_tables {
        Some(p) if !p.is_empty() => Ok(Some(Arc::new(FactorTable::load(std::path::Path::new(p))?))),
        _ => Ok(None),
    }
}

fn factorizer(cli: &Cli) -> Result<Factorizer> {
    Ok(Factorizer::new(effort(cli)?, factor_table(cli)?))
}

fn factorization_json(f: &IntFactorization) -> Value {
    json!({
        "value": f.value().to_string(),
        "factors": f.factors().iter().map(|(p, e)| json!([p.to_string(), e])).collect::<Vec<_>>(),
        "cofactor": f.cofactor().to_string(),
        "complete": f.is_complete(),
        "provenance": f.provenance(),
    })
}

/// W(q^m − 1), exact when the factorization is complete, otherwise an upper bound.
fn w_input(f: &IntFactorization, fz: &Factorizer) -> Result<WInput> {
    if f.is_complete() {
        Ok(WInput::exact(big_w(f)?))
    } else {
        Ok(WInput::bound(w_upper_bound(f, &fz.trial_bound())?))
    }
}

fn cmd_factor(cli: &Cli, out: &mut Emitter) -> Result<()> {
    let m = need_m(cli)?;
    let fz = factorizer(cli)?;
    let f = fz.factor_qm_minus_1(cli.p, cli.k as u64, m)?;
    let w = w_input(&f, &fz)?;
    out.record(
        "factorization",
        json!({ "q": cli.p.pow(cli.k), "m": m, "factorization": factorization_json(&f), "W": w }),
    )
}

fn cmd_suff(cli: &Cli, out: &mut Emitter) -> Result<()> {
    let m = need_m(cli)?;
    let fz = factorizer(cli)?;
    let f = fz.factor_qm_minus_1(cli.p, cli.k as u64, m)?;
    let cyclo = cyclotomic_structure(cli.p, cli.k, m)?;
    let w_xm = BigUint::from(2u32).pow(cyclo.distinct_count() as u32);
    let inst = PairInstance::new(cli.p, cli.k, m, cli.n);
    let rep = suff_check(&inst, &w_input(&f, &fz)?, &w_xm);
    out.record(
        "suff",
        json!({ "factorization": factorization_json(&f), "W_xm": w_xm.to_string(), "report": rep }),
    )
}

fn cmd_sieve(cli: &Cli, out: &mut Emitter) -> Result<()> {
    let m = need_m(cli)?;
    let fz = factorizer(cli)?;
    let f = fz.factor_qm_minus_1(cli.p, cli.k as u64, m)?;
    let cyclo = cyclotomic_structure(cli.p, cli.k, m)?;
    let inst = PairInstance::new(cli.p, cli.k, m, cli.n);
    let mut setup = SieveSetup::new(inst, &f, &cyclo, &fz.trial_bound())?;
    setup.l_formula = cli.l_formula.into();
    let res = sieve_search(&setup, cli.budget);
    out.record("sieve", json!({ "factorization": factorization_json(&f), "search": res }))
}

fn cmd_tables(cli: &Cli, out: &mut Emitter) -> Result<()> {
    let r = reference();
    let which: &[u8] = match cli.table {
        None => &[1, 2],
        Some(1) => &[1],
        Some(2) => &[2],
        Some(t) => return Err(input(format!("no table {t}"))),
    };
    if which.contains(&1) {
        let mut rows = default_nu_schedule();
        if let Some(nu) = cli.nu {
            if !(nu > 1.0) {
                return Err(input("--nu must exceed 1"));
            }
            rows.iter_mut().for_each(|row| row.nu = nu);
        }
        let mut cache = DCache::default();
        let computed = threshold_rows(r.characteristic, cli.n, &rows, &mut cache)?;
        for row in computed {
            let printed = r.thresholds.iter().find(|t| t.k_lo == row.k_lo && t.k_hi == row.k_hi).map(|t| t.m_k);
            let diff = match (row.m_k, printed) {
                (Some(a), Some(b)) => Some(a as i64 - b as i64),
                _ => None,
            };
            out.record("threshold_row", json!({ "row": row, "printed_m_k": printed, "difference": diff }))?;
        }
    }
    if which.contains(&2) {
        let fz = factorizer(cli)?;
        for row in &r.sieve_rows {
            let ev = sieve_row_reproduce(r.characteristic, cli.n, row, &fz, cli.l_formula.into())?;
            out.record(
                "sieve_row",
                json!({
                    "q": row.q, "m": row.m, "d": row.d, "r": ev.r, "g": ev.g_factors.len(), "s": ev.s,
                    "l": ev.l_f64, "L": ev.lambda, "holds": ev.holds,
                    "printed_r": row.r, "printed_s": row.s, "printed_l": row.l, "printed_L": row.lambda,
                    "l_difference": ev.l_f64 - row.l,
                    "L_difference": ev.lambda.map(|x| x - row.lambda),
                }),
            )?;
        }
    }
    Ok(())
}

fn parse_range(s: &str) -> Result<(u32, u32)> {
    let (lo, hi) = s.split_once("..").ok_or_else(|| input(format!("bad --k-range {s:?}, expected LO..HI")))?;
    let p = |t: &str| t.trim().parse::<u32>().map_err(|_| input(format!("bad --k-range {s:?}")));
    let (lo, hi) = (p(lo)?, p(hi)?);
    if lo == 0 || lo > hi {
        return Err(input(format!("empty --k-range {s:?}")));
    }
    Ok((lo, hi))
}

fn cmd_exceptions(cli: &Cli, out: &mut Emitter) -> Result<()> {
    let mut cfg = PipelineConfig { p: cli.p, n: cli.n, l_formula: cli.l_formula.into(), ..PipelineConfig::default() };
    cfg.effort = effort(cli)?;
    if let Some(s) = &cli.k_range {
        let (lo, hi) = parse_range(s)?;
        cfg.small_k = (lo..=hi.min(2)).collect();
        cfg.large_k = (hi >= 3).then_some((lo.max(3), hi));
    }
    let rep = exceptions_pipeline(&cfg, factor_table(cli)?)?;
    for s in &rep.small_k {
        out.record("small_k", serde_json::to_value(s).map_err(|e| Error::Integrity(e.to_string()))?)?;
    }
    if let Some(l) = &rep.large_k {
        out.record("large_k", serde_json::to_value(l).map_err(|e| Error::Integrity(e.to_string()))?)?;
    }
    out.record(
        "exceptions",
        json!({
            "pipeline_config": rep.config,
            "computed_exceptions": rep.computed_exceptions,
            "unresolved": rep.unresolved,
            "reference": reference().exception_pairs,
            "common": rep.common,
            "missing": rep.missing,
            "extra": rep.extra,
        }),
    )
}

fn context(cli: &Cli) -> Result<FieldContext> {
    let m = need_m(cli)?;
    let m = u32::try_from(m).map_err(|_| input("--m too large"))?;
    make_context(cli.p, cli.k, m, cli.seed)
}

fn parse_trace(base: &BaseField, s: &Option<String>) -> Result<Option<u32>> {
    match s.as_deref() {
        None | Some("*") => Ok(None),
        Some(t) => base.parse_elem(t).map(Some),
    }
}

fn cmd_verify(cli: &Cli, out: &mut Emitter) -> Result<()> {
    let ctx = context(cli)?;
    let base = ctx.base().clone();
    let a = parse_trace(&base, &cli.a)?;
    let b = parse_trace(&base, &cli.b)?;
    let f = RationalFunction::parse(&ctx, &cli.f)?;
    let sf = ScanField::new(&ctx, cli.scan_limit)?;
    let membership = check_membership(&f, sf.qm1())?;
    let full = FreenessSpec::full(&sf);
    let table = count_pairs_table(&sf, &f, &full, &full)?;
    let q = base.q();
    let targets: Vec<(u32, u32)> = (0..q)
        .flat_map(|x| (0..q).map(move |y| (x, y)))
        .filter(|&(x, y)| a.is_none_or(|v| v == x) && b.is_none_or(|v| v == y))
        .collect();
    let mut all_verified = true;
    let mut attained = 0;
    for &(x, y) in &targets {
        let cell = table.get(Some(x), Some(y))?;
        let check = match &cell.witness {
            Some(w) => Some(verify_witness(&sf, &f, w, Some(x), Some(y), &full, &full)?),
            None => None,
        };
        if let Some(c) = &check {
            all_verified &= c.ok;
            attained += 1;
        }
        out.record(
            "pair_count",
            json!({
                "a": base.format_elem(&x), "b": base.format_elem(&y), "count": cell.count,
                "exists": cell.count > 0,
                "witness": cell.witness.as_ref().map(|w| ctx.format_elem(w)),
                "witness_check": check,
            }),
        )?;
    }
    let nonzero: Vec<_> = targets.iter().filter(|&&(x, y)| x != 0 && y != 0).collect();
    let nonzero_attained = nonzero.iter().filter(|&&&(x, y)| table.get(Some(x), Some(y)).is_ok_and(|c| c.count > 0)).count();
    if !all_verified {
        return Err(Error::Integrity("a witness failed independent re-verification".into()));
    }
    out.record(
        "existence",
        json!({
            "field": ctx.describe(),
            "f": f.to_string(),
            "membership": membership,
            "scanned": table.scanned,
            "excluded": table.excluded.iter().map(|e| ctx.format_elem(e)).collect::<Vec<_>>(),
            "pairs_requested": targets.len(),
            "pairs_attained": attained,
            "nonzero_pairs_requested": nonzero.len(),
            "nonzero_pairs_attained": nonzero_attained,
            "witnesses_verified": all_verified,
            "exists_for_all_requested": attained == targets.len(),
            "qm1": factorization_json(sf.qm1()),
        }),
    )
}

fn cmd_charsum(cli: &Cli, out: &mut Emitter) -> Result<()> {
    let ctx = context(cli)?;
    let sf = ScanField::new(&ctx, cli.scan_limit)?;
    let cs = CharacterSystem::new(&sf)?;
    let f = RationalFunction::parse(&ctx, &cli.f)?;
    let g = cli.g.as_deref().map(|s| RationalFunction::parse(&ctx, s)).transpose()?;
    let chars: Vec<MultChar> = match cli.d {
        Some(d) => {
            let all = cs.chars_of_order(d)?;
            let c = all.into_iter().find(|c| c.s == cli.s % d.max(1)).ok_or_else(|| {
                input(format!("s = {} is not coprime to d = {d}", cli.s))
            })?;
            vec![c]
        }
        None => pnpair::numtheory::divisors_u64(sf.group_order())
            .into_iter()
            .filter(|&d| d > 1 && pnpair::numtheory::factor_u64(d).iter().all(|&(_, e)| e == 1))
            .map(|d| cs.chars_of_order(d))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect(),
    };
    for chi in chars {
        let rep = match &g {
            None => weil_sum_check(&cs, &f, chi)?,
            Some(g) => castro_sum_check(&cs, &f, g, chi, cli.beta)?,
        };
        out.record("charsum", serde_json::to_value(&rep).map_err(|e| Error::Integrity(e.to_string()))?)?;
    }
    Ok(())
}
