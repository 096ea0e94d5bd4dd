use super::variants::{variant_check, VariantInputs};
use super::{PairInstance, Variant};
use crate::error::Result;
use crate::numtheory::{compute_d, WBoundParams};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// A ν value applied to the range k_lo ≤ k ≤ k_hi.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuRow {
    pub nu: f64,
    pub k_lo: u32,
    pub k_hi: u32,
}

/// ν schedule for q = 5^k, 3 ≤ k ≤ 385896, listed from large k to small k.
pub fn default_nu_schedule() -> Vec<NuRow> {
    let rows: [(f64, u32, u32); 21] = [
        (13.7, 1379, 385896),
        (11.3, 212, 1378),
        (10.1, 84, 211),
        (9.52, 48, 83),
        (9.2, 33, 47),
        (8.9, 26, 32),
        (8.7, 21, 25),
        (8.6, 18, 20),
        (8.5, 16, 17),
        (8.5, 14, 15),
        (8.4, 13, 13),
        (8.4, 12, 12),
        (8.5, 11, 11),
        (8.4, 10, 10),
        (8.4, 9, 9),
        (8.5, 8, 8),
        (8.4, 7, 7),
        (8.5, 6, 6),
        (8.8, 5, 5),
        (9.4, 4, 4),
        (11.3, 3, 3),
    ];
    rows.iter().map(|&(nu, k_lo, k_hi)| NuRow { nu, k_lo, k_hi }).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdRow {
    pub nu: f64,
    pub k_lo: u32,
    pub k_hi: u32,
    pub log10_d: f64,
    /// Least M with the D-form holding for every m ≥ M and every k in the range;
    /// None when the slope in m is not positive.
    pub m_k: Option<u64>,
    /// Slope of lhs − rhs (log10) in m at k = k_lo.
    pub slope: f64,
}

/// Caches D(ν) with the characteristic left out.
#[derive(Default)]
pub struct DCache {
    map: HashMap<u64, WBoundParams>,
}

impl DCache {
    pub fn get(&mut self, nu: f64, p: u64) -> Result<WBoundParams> {
        let key = nu.to_bits() ^ p.rotate_left(52);
        if let Some(d) = self.map.get(&key) {
            return Ok(d.clone());
        }
        let d = compute_d(nu, &[p])?;
        self.map.insert(key, d.clone());
        Ok(d)
    }
}

fn d_form_holds(p: u64, k: u32, m: u64, n: u64, d: &WBoundParams) -> bool {
    let inst = PairInstance::new(p, k, m, n);
    let inputs = VariantInputs { d: Some(d.clone()), ..Default::default() };
    variant_check(&inst, Variant::DForm, &inputs).map(|r| r.holds).unwrap_or(false)
}

/// Least M such that the D-form holds for all m ≥ M at fixed (p, k, ν). The
/// log-difference is affine in m, so a positive slope makes the holding set a ray.
pub fn d_form_min_m(p: u64, k: u32, n: u64, d: &WBoundParams) -> (Option<u64>, f64) {
    let lq = k as f64 * (p as f64).log10();
    let slope = lq * (0.5 - 2.0 / d.nu) - 2.0 * std::f64::consts::LOG10_2;
    if slope <= 0.0 {
        return (None, slope);
    }
    let b = 2.0 * lq + ((2 * n + 1) as f64).log10() + 2.0 * d.log10_d;
    let mut m = ((b / slope).floor() as u64).max(1);
    while m > 1 && d_form_holds(p, k, m - 1, n, d) {
        m -= 1;
    }
    while !d_form_holds(p, k, m, n, d) {
        m += 1;
    }
    (Some(m), slope)
}

/// m_k for each row of a ν schedule; the slope grows with k, so the smallest k decides.
pub fn threshold_rows(p: u64, n: u64, rows: &[NuRow], cache: &mut DCache) -> Result<Vec<ThresholdRow>> {
    rows.iter()
        .map(|row| {
            let d = cache.get(row.nu, p)?;
            let (m_k, slope) = d_form_min_m(p, row.k_lo, n, &d);
            Ok(ThresholdRow {
                nu: row.nu,
                k_lo: row.k_lo,
                k_hi: row.k_hi,
                log10_d: d.log10_d,
                m_k,
                slope,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchor_rows() {
        let mut cache = DCache::default();
        let rows = [
            NuRow { nu: 9.4, k_lo: 4, k_hi: 4 },
            NuRow { nu: 8.4, k_lo: 13, k_hi: 13 },
            NuRow { nu: 13.7, k_lo: 1379, k_hi: 385896 },
        ];
        let t = threshold_rows(5, 4, &rows, &mut cache).unwrap();
        assert_eq!(t[0].m_k, Some(99));
        assert_eq!(t[1].m_k, Some(16));
        assert_eq!(t[2].m_k, Some(6));
    }

    #[test]
    fn nonpositive_slope() {
        let mut cache = DCache::default();
        let d = cache.get(4.0, 5).unwrap();
        assert_eq!(d_form_min_m(5, 3, 4, &d).0, None);
    }
}
