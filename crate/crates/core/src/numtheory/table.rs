//! External factor tables: lines of the form `base^exp-1: p1 p2 ...`, '#' comments.

use super::primes::is_probable_prime;
use crate::error::{Error, Result};
use num_bigint::BigUint;
use num_traits::Zero;
use std::path::Path;

#[derive(Clone, Debug, Default)]
pub struct FactorTable {
    entries: Vec<TableEntry>,
    primes: Vec<BigUint>,
    sources: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct TableEntry {
    pub base: BigUint,
    pub exp: u32,
    pub primes: Vec<BigUint>,
}

pub const ENV_VAR: &str = "PNPAIR_FACTOR_TABLES";

impl FactorTable {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut t = FactorTable::default();
        t.merge_text(text, source)?;
        Ok(t)
    }

    fn merge_text(&mut self, text: &str, source: &str) -> Result<()> {
        let bad = |line: usize, msg: &str| {
            Error::input(format!("{source}:{line}: {msg}"))
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (lhs, rhs) = line
                .split_once(':')
                .ok_or_else(|| bad(i + 1, "expected 'base^exp-1: primes'"))?;
            let lhs = lhs.trim();
            let body = lhs
                .strip_suffix("-1")
                .ok_or_else(|| bad(i + 1, "left side must end in -1"))?;
            let (b, e) = body
                .split_once('^')
                .ok_or_else(|| bad(i + 1, "left side must be base^exp-1"))?;
            let base: BigUint = b.trim().parse().map_err(|_| bad(i + 1, "bad base"))?;
            let exp: u32 = e.trim().parse().map_err(|_| bad(i + 1, "bad exponent"))?;
            if base < BigUint::from(2u32) || exp == 0 {
                return Err(bad(i + 1, "base must be ≥ 2 and exponent ≥ 1"));
            }
            let value = base.pow(exp) - 1u32;
            let mut primes = Vec::new();
            for tok in rhs.split_whitespace() {
                let p: BigUint = tok
                    .parse()
                    .map_err(|_| bad(i + 1, &format!("bad prime '{tok}'")))?;
                if !is_probable_prime(&p) {
                    return Err(bad(i + 1, &format!("{p} is not prime")));
                }
                if !(&value % &p).is_zero() {
                    return Err(bad(i + 1, &format!("{p} does not divide {b}^{e}-1")));
                }
                primes.push(p);
            }
            if primes.is_empty() {
                return Err(bad(i + 1, "no primes listed"));
            }
            for p in &primes {
                if !self.primes.contains(p) {
                    self.primes.push(p.clone());
                }
            }
            self.entries.push(TableEntry { base, exp, primes });
        }
        self.primes.sort();
        self.sources.push(source.to_string());
        Ok(())
    }

    /// Loads a file, or every `*.txt` file of a directory in name order.
    pub fn load(path: &Path) -> Result<Self> {
        let mut t = FactorTable::default();
        let files = if path.is_dir() {
            let mut v: Vec<_> = std::fs::read_dir(path)
                .map_err(|e| Error::input(format!("{}: {e}", path.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "txt"))
                .collect();
            v.sort();
            v
        } else {
            vec![path.to_path_buf()]
        };
        for f in files {
            let text = std::fs::read_to_string(&f)
                .map_err(|e| Error::input(format!("{}: {e}", f.display())))?;
            t.merge_text(&text, &f.display().to_string())?;
        }
        Ok(t)
    }

    /// Table named by the environment variable, if set.
    pub fn from_env() -> Result<Option<Self>> {
        match std::env::var_os(ENV_VAR) {
            Some(p) if !p.is_empty() => Self::load(Path::new(&p)).map(Some),
            _ => Ok(None),
        }
    }

    pub fn entries(&self) -> &[TableEntry] {
        &self.entries
    }
    pub fn primes(&self) -> &[BigUint] {
        &self.primes
    }
    pub fn sources(&self) -> &[String] {
        &self.sources
    }
}
