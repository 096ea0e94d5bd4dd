//! Exhaustive trace-constrained pair counts.

use super::{is_e_free, is_g_free, is_normal_by_rank, FreenessSpec, ScanField};
use crate::error::{Error, Result};
use crate::ffield::{Field, FieldContext, FieldElement};
use crate::ratfunc::{Evaluation, RationalFunction};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct PairCountResult {
    pub a: Option<u32>,
    pub b: Option<u32>,
    pub count: u64,
    /// Smallest qualifying element by index.
    #[serde(serialize_with = "ser_elem")]
    pub witness: Option<FieldElement>,
    /// Elements scanned, i.e. q^m − |S|.
    pub scanned: u64,
}

fn ser_elem<S: serde::Serializer>(w: &Option<FieldElement>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match w {
        Some(e) => s.collect_seq(e.coeffs()),
        None => s.serialize_none(),
    }
}

/// Counts for every (a, b) ∈ F_q × F_q from one scan.
#[derive(Clone, Debug)]
pub struct PairCountTable {
    q: usize,
    counts: Vec<u64>,
    witness: Vec<Option<u64>>,
    pub scanned: u64,
    pub excluded: Vec<FieldElement>,
    ctx: FieldContext,
}

impl PairCountTable {
    pub fn q(&self) -> u32 {
        self.q as u32
    }

    pub fn get(&self, a: Option<u32>, b: Option<u32>) -> Result<PairCountResult> {
        let q = self.q as u32;
        if a.is_some_and(|v| v >= q) || b.is_some_and(|v| v >= q) {
            return Err(Error::input(format!("trace target outside F_{q}")));
        }
        let mut count = 0;
        let mut wit: Option<u64> = None;
        for ai in 0..q {
            for bi in 0..q {
                if a.is_some_and(|v| v != ai) || b.is_some_and(|v| v != bi) {
                    continue;
                }
                let cell = ai as usize * self.q + bi as usize;
                count += self.counts[cell];
                wit = match (wit, self.witness[cell]) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    (x, y) => x.or(y),
                };
            }
        }
        Ok(PairCountResult {
            a,
            b,
            count,
            witness: wit.map(|i| self.ctx.from_index(i)),
            scanned: self.scanned,
        })
    }

    /// Every (a, b) cell in row-major order.
    pub fn cells(&self) -> Vec<PairCountResult> {
        let q = self.q as u32;
        (0..q)
            .flat_map(|a| (0..q).map(move |b| (a, b)))
            .map(|(a, b)| self.get(Some(a), Some(b)).unwrap())
            .collect()
    }

    /// Number of (a, b) with a positive count.
    pub fn positive_cells(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

/// Scans F_{q^m} \ S once and tabulates N over all trace pairs.
pub fn count_pairs_table(
    field: &ScanField,
    f: &RationalFunction,
    spec1: &FreenessSpec,
    spec2: &FreenessSpec,
) -> Result<PairCountTable> {
    let ctx = field.context();
    if f.context().id() != ctx.id() {
        return Err(Error::LevelMismatch("rational function lives over a different field".into()));
    }
    let excluded = f.excluded_set()?;
    let mut skip: Vec<u64> = excluded.iter().map(|x| ctx.index(x)).collect();
    skip.sort_unstable();
    let q = ctx.q() as usize;
    let size = field.size();
    let dlog = field.dlog();
    let order = dlog.order();
    let inv_index = |i: u64| dlog.exp_index(order - dlog.log_index(i).unwrap() as u64);
    let lead = f.lead().clone();
    let num = f.numerator();
    let den = f.denominator();
    let e2_demanded = !spec2.e_primes.is_empty();

    const CHUNK: u64 = 1 << 14;
    let chunks = size.div_ceil(CHUNK);
    let partial: Vec<(Vec<u64>, Vec<Option<u64>>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut counts = vec![0u64; q * q];
            let mut wit = vec![None; q * q];
            for i in c * CHUNK..((c + 1) * CHUNK).min(size) {
                if skip.binary_search(&i).is_ok() || !field.is_e_free_index(i, spec1) || !field.is_g_free_index(i, spec1) {
                    continue;
                }
                let x = field.element(i);
                let d = den.eval(&x);
                let di = ctx.index(&d);
                if di == 0 {
                    continue;
                }
                let v = ctx.mul(&ctx.mul(&num.eval(&x), &lead), &field.element(inv_index(di)));
                let vi = ctx.index(&v);
                if vi == 0 && e2_demanded {
                    continue;
                }
                if (vi != 0 && !field.is_e_free_index(vi, spec2)) || !field.is_g_free_index(vi, spec2) {
                    continue;
                }
                let cell = field.trace_index(i) as usize * q + field.trace_index(vi) as usize;
                counts[cell] += 1;
                if wit[cell].is_none() {
                    wit[cell] = Some(i);
                }
            }
            (counts, wit)
        })
        .collect();
    let mut counts = vec![0u64; q * q];
    let mut witness: Vec<Option<u64>> = vec![None; q * q];
    // chunks are in index order, so the first witness seen is the minimum
    for (c, w) in partial {
        for j in 0..q * q {
            counts[j] += c[j];
            if witness[j].is_none() {
                witness[j] = w[j];
            }
        }
    }
    Ok(PairCountTable {
        q,
        counts,
        witness,
        scanned: size - skip.len() as u64,
        excluded,
        ctx: ctx.clone(),
    })
}

/// N_{f,a,b}(e1, e2, g1, g2); `None` leaves that trace unrestricted.
pub fn count_pairs(
    field: &ScanField,
    f: &RationalFunction,
    a: Option<u32>,
    b: Option<u32>,
    spec1: &FreenessSpec,
    spec2: &FreenessSpec,
) -> Result<PairCountResult> {
    count_pairs_table(field, f, spec1, spec2)?.get(a, b)
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessCheck {
    pub in_excluded_set: bool,
    pub e1_free: bool,
    pub g1_free: bool,
    pub e2_free: bool,
    pub g2_free: bool,
    /// Rank test on the conjugates; only meaningful for the full g.
    pub normal_by_rank: Option<(bool, bool)>,
    pub trace: u32,
    pub image_trace: Option<u32>,
    pub ok: bool,
}

/// Re-derives every defining predicate for a claimed witness without the scan tables.
#[allow(clippy::too_many_arguments)]
pub fn verify_witness(
    field: &ScanField,
    f: &RationalFunction,
    x: &FieldElement,
    a: Option<u32>,
    b: Option<u32>,
    spec1: &FreenessSpec,
    spec2: &FreenessSpec,
) -> Result<WitnessCheck> {
    let ctx = field.context();
    let in_s = f.excluded_set()?.contains(x);
    let polys = |s: &FreenessSpec| s.g_factors.iter().map(|&i| field.factors()[i].clone()).collect::<Vec<_>>();
    let e_free = |y: &FieldElement, s: &FreenessSpec| -> Result<bool> {
        if ctx.is_zero(y) {
            Ok(s.e_primes.is_empty())
        } else {
            is_e_free(ctx, y, &s.e_primes)
        }
    };
    let trace = ctx.trace_to_base(x)?;
    let e1_free = e_free(x, spec1)?;
    let g1_free = is_g_free(ctx, x, &polys(spec1))?;
    let (image, e2_free, g2_free) = match f.evaluate(x) {
        Evaluation::Pole => (None, false, false),
        Evaluation::Value(v) => {
            let e2 = e_free(&v, spec2)?;
            let g2 = is_g_free(ctx, &v, &polys(spec2))?;
            (Some(v), e2, g2)
        }
    };
    let image_trace = image.as_ref().map(|v| ctx.trace_to_base(v)).transpose()?;
    let full_g = |s: &FreenessSpec| s.g_factors.len() == field.factors().len();
    let normal_by_rank = (full_g(spec1) && full_g(spec2))
        .then(|| image.as_ref().map(|v| (is_normal_by_rank(ctx, x), is_normal_by_rank(ctx, v))))
        .flatten();
    let ok = !in_s
        && e1_free
        && g1_free
        && e2_free
        && g2_free
        && normal_by_rank.is_none_or(|(u, v)| u && v)
        && a.is_none_or(|t| t == trace)
        && b.is_none_or(|t| Some(t) == image_trace);
    Ok(WitnessCheck {
        in_excluded_set: in_s,
        e1_free,
        g1_free,
        e2_free,
        g2_free,
        normal_by_rank,
        trace,
        image_trace,
        ok,
    })
}
