//! Divergence-based normality analysis for symbol sequences.
//!
//! The crate measures how far the aligned block statistics of a sequence
//! drift from a target product measure (in bits of KL divergence per
//! block), runs finite-state gamblers against sequences with exact risk
//! accounting, synthesizes gamblers that exploit skewed block statistics,
//! and turns divergence estimates into bounds on finite-state dimension.
//!
//! Probability vectors carry their arithmetic mode: exact (arbitrary
//! precision rationals) or float (f64). Exact mode keeps identities like
//! D(a || a) = 0 free of rounding; float mode trades that for speed.

pub mod alphabet;
pub mod dimension;
pub mod divergence;
pub mod empirical;
pub mod error;
pub mod gambler;
pub mod measures;
mod scc;
pub mod sequences;
pub mod synthesis;

pub use alphabet::{Alphabet, Space};
pub use error::{Error, Result};
pub use measures::{ExtReal, Mode, Prob};
