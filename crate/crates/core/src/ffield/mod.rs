//! Tower arithmetic F_p ⊂ F_q ⊂ F_{q^m}: F_q as F_p[y]/(g), F_{q^m} as F_q[x]/(h).

mod base;
mod dlog;
mod ext;
mod prime;
pub(crate) mod text;

pub use base::BaseField;
pub use dlog::{build_dlog, DlogTable, DEFAULT_DLOG_LIMIT};
pub use ext::{make_context, ContextOptions, FieldContext, FieldElement};
pub use prime::PrimeField;

use crate::error::Result;
use num_bigint::BigUint;
use rand_chacha::ChaCha8Rng;
use std::fmt::Debug;
use std::hash::Hash;

/// Identifies a field level: characteristic, degrees and a fingerprint of the moduli.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub struct FieldId {
    pub p: u64,
    pub k: u32,
    pub m: u32,
    pub fingerprint: u64,
}

pub trait Field: Clone + Debug + Send + Sync {
    type Elem: Clone + Debug + PartialEq + Eq + Hash + Ord + Send + Sync;

    fn id(&self) -> FieldId;
    fn characteristic(&self) -> u64;
    /// Number of elements.
    fn size(&self) -> BigUint;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem>;
    /// The unique b with b^p = a.
    fn pth_root(&self, a: &Self::Elem) -> Self::Elem;
    /// Image of an integer under Z → F_p ⊂ F.
    fn from_int(&self, n: i64) -> Self::Elem;
    fn random(&self, rng: &mut ChaCha8Rng) -> Self::Elem;
    fn format_elem(&self, a: &Self::Elem) -> String;
    fn parse_elem(&self, s: &str) -> Result<Self::Elem>;

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    fn pow(&self, a: &Self::Elem, e: &BigUint) -> Self::Elem {
        let mut r = self.one();
        for i in (0..e.bits()).rev() {
            r = self.mul(&r, &r);
            if e.bit(i) {
                r = self.mul(&r, a);
            }
        }
        r
    }
}

fn fingerprint(words: &[u64]) -> u64 {
    // FNV-1a over the moduli coefficients
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for w in words {
        for b in w.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}
