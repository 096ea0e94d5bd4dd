//! Sufficient-condition inequalities, δ(q, m′), the prime sieve evaluator and
//! search, threshold tables and the characteristic-5 exception pipeline.

mod delta;
mod pipeline;
pub mod reference;
mod sieve;
mod thresholds;
mod sieve_rows;
mod variants;

pub use delta::{delta_compute, MDecomposition};
pub use pipeline::{
    assemble, exceptions_pipeline, large_k_stage, small_k_stage, CaseStats, FormOutcome, InstanceVerdict,
    LargeKReport, LargeKRow, NuGrid, PairDiff, PipelineConfig, PipelineReport, SmallKReport, SpecialClass,
    Stage,
};
pub use sieve::{
    lemma_selection, sieve_evaluate, sieve_evaluate_bounded, sieve_search, LFormula, SieveEvaluation,
    SieveSearchResult, SieveSetup,
};
pub use sieve_rows::{sieve_row_base, sieve_row_reproduce};
pub use thresholds::{d_form_min_m, default_nu_schedule, threshold_rows, DCache, NuRow, ThresholdRow};
pub use variants::{
    d_form_min_k, least_threshold, suff_check, variant_check, DeltaScale, VariantInputs, WInput,
};

use num_bigint::BigUint;
use serde::Serialize;

/// (q, m, n) with q = p^k.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PairInstance {
    pub p: u64,
    pub k: u32,
    pub m: u64,
    pub n: u64,
}

impl PairInstance {
    pub fn new(p: u64, k: u32, m: u64, n: u64) -> Self {
        PairInstance { p, k, m, n }
    }
    pub fn q(&self) -> BigUint {
        BigUint::from(self.p).pow(self.k)
    }
    pub fn q_u64(&self) -> Option<u64> {
        self.p.checked_pow(self.k)
    }
    pub fn log10_q(&self) -> f64 {
        self.k as f64 * (self.p as f64).log10()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    /// Failed only under an upper bound for W, so nothing is decided.
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Variant {
    Suff,
    DForm,
    D1Form,
    MprimeForm,
    DeltaForm,
}

/// One inequality evaluation; lhs and rhs are log10 values.
#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub instance: PairInstance,
    pub variant: Variant,
    pub nu: Option<f64>,
    pub lhs_log10: f64,
    pub rhs_log10: f64,
    pub holds: bool,
    pub verdict: Verdict,
    /// Bound on the floating error of lhs − rhs (0 for exact comparisons).
    pub error_margin: f64,
    /// |lhs − rhs| below max(error_margin, 1e-6).
    pub near_margin: bool,
    pub exact: bool,
}

/// log10 of a big integer, accurate to about 1e-15 relative.
pub fn log10_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        let v: f64 = num_traits::ToPrimitive::to_f64(n).unwrap_or(f64::INFINITY);
        if v.is_finite() {
            return v.log10();
        }
    }
    let shift = bits - 64;
    let top: BigUint = n >> shift;
    let v = num_traits::ToPrimitive::to_f64(&top).unwrap();
    v.log10() + shift as f64 * std::f64::consts::LOG10_2
}
