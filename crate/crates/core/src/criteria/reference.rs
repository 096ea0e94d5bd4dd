//! Published values kept for audit diffs only; nothing in the computation reads them.

use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

pub const REFERENCE_JSON: &str = include_str!("../../data/reference.json");

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThresholdRef {
    pub nu: f64,
    pub k_lo: u32,
    pub k_hi: u32,
    pub m_k: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SieveRowRef {
    pub q: u64,
    pub m: u64,
    pub d: u64,
    pub r: usize,
    /// [c0, c1] is x + c0 + c1·β.
    pub g: Vec<[u32; 2]>,
    pub s: usize,
    pub l: f64,
    #[serde(rename = "L")]
    pub lambda: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DBoundRef {
    pub nu: f64,
    pub mantissa: f64,
    pub exponent: i32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KThresholdRef {
    pub nu: f64,
    pub k: u32,
    pub m_min: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeltaThresholdRef {
    pub q: u64,
    pub nu: f64,
    pub delta: String,
    pub m_prime: Option<u64>,
    pub m: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Reference {
    pub version: u32,
    pub characteristic: u64,
    pub n: u64,
    pub thresholds: Vec<ThresholdRef>,
    pub sieve_rows: Vec<SieveRowRef>,
    pub exception_pairs: Vec<(u64, u64)>,
    pub nominated_pairs: Vec<(u64, u64)>,
    pub large_k_candidate_count: u64,
    pub large_k_range: (u32, u32),
    pub d_bound: DBoundRef,
    pub d_form_k_threshold: KThresholdRef,
    pub delta_thresholds: Vec<DeltaThresholdRef>,
    /// Intermediate m lists, kept verbatim (including apparent typos).
    pub printed_lists: serde_json::Value,
}

pub fn reference() -> &'static Reference {
    static R: OnceLock<Reference> = OnceLock::new();
    R.get_or_init(|| serde_json::from_str(REFERENCE_JSON).expect("embedded reference data parses"))
}

#[cfg(test)]
mod tests {
    #[test]
    fn parses() {
        let r = super::reference();
        assert_eq!(r.thresholds.len(), 21);
        assert_eq!(r.sieve_rows.len(), 14);
        assert_eq!(r.exception_pairs.len(), 12);
        assert_eq!(r.sieve_rows[13].g.len(), 14);
    }
}
