//! Desk-scale laboratory for Khintchine-type theorems with random
//! numerators: exact measures of approximation sets, random numerator
//! models, ubiquity block schemes and concentration experiments, and the
//! factorial counterexample construction.

pub mod arith;
pub mod blocks;
pub mod counterexample;
pub mod error;
pub mod frac;
pub mod intervals;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod psi;
pub mod ubiquity;

pub use error::{Error, Result};
pub use frac::{Frac, Rational};
pub use intervals::{IntervalSet, RationalInterval};
