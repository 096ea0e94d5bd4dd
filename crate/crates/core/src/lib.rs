//! Finite-field toolkit for primitive normal pairs (ε, f(ε)) with prescribed traces:
//! sufficient-condition inequalities, the prime sieve, the characteristic-5 audit
//! pipeline and a brute-force existence oracle for small fields.

pub mod error;
pub mod numtheory;

pub use error::{Error, ErrorKind, Result};
pub mod ffield;
pub mod polyalg;
pub mod ratfunc;
pub mod criteria;
pub mod oracle;
