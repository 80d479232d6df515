//! LCM-k-free sets of integers, sunflower-free set families, and the
//! harmonic sums that tie them together.

pub mod error;
pub mod harmonic;
pub mod primes;
pub mod rational;
pub mod capacity;
pub mod cli;
pub mod constructions;
pub mod lcmfree;
pub mod setfam;

pub use error::{Error, Result};
