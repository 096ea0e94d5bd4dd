use super::{Field, FieldContext, FieldElement};
use crate::error::{Error, Result};

pub const DEFAULT_DLOG_LIMIT: u64 = 1 << 24;

/// Discrete logarithms to the context generator, indexed by element index.
pub struct DlogTable {
    generator: FieldElement,
    log: Vec<u32>,
    exp: Vec<u32>,
}

pub fn build_dlog(ctx: &FieldContext, limit: u64) -> Result<DlogTable> {
    let size = ctx.order_u64().filter(|&s| s <= limit).ok_or_else(|| {
        Error::resource("discrete log table", ctx.size(), limit)
    })?;
    let g = ctx
        .generator()
        .cloned()
        .ok_or_else(|| Error::input("context has no certified generator"))?;
    let n = (size - 1) as usize;
    let mut log = vec![u32::MAX; size as usize];
    let mut exp = vec![0u32; n];
    let mut x = ctx.one();
    for (e, slot) in exp.iter_mut().enumerate() {
        let i = ctx.index(&x) as usize;
        if log[i] != u32::MAX {
            return Err(Error::Integrity("generator order is below q^m - 1".into()));
        }
        log[i] = e as u32;
        *slot = i as u32;
        x = ctx.mul(&x, &g);
    }
    if !ctx.is_one(&x) {
        return Err(Error::Integrity("generator power cycle does not close".into()));
    }
    Ok(DlogTable { generator: g, log, exp })
}

impl DlogTable {
    pub fn generator(&self) -> &FieldElement {
        &self.generator
    }
    /// Group order q^m − 1.
    pub fn order(&self) -> u64 {
        self.exp.len() as u64
    }
    /// Exponent of a nonzero element given by index; None at 0.
    pub fn log_index(&self, idx: u64) -> Option<u32> {
        let l = self.log[idx as usize];
        (l != u32::MAX).then_some(l)
    }
    pub fn log(&self, ctx: &FieldContext, x: &FieldElement) -> Option<u32> {
        self.log_index(ctx.index(x))
    }
    /// Index of generator^e.
    pub fn exp_index(&self, e: u64) -> u64 {
        self.exp[(e % self.order()) as usize] as u64
    }
    pub fn len(&self) -> usize {
        self.exp.len()
    }
    pub fn is_empty(&self) -> bool {
        self.exp.is_empty()
    }
}
