//! Sequential classification from empirically observed statistics.
//!
//! A decision maker holds one length-`N` training sequence per class and
//! receives test samples one at a time. The sequential test scores each
//! class by `n * GJS(T_train, T_test, N / n)` and stops as soon as every
//! class but one has crossed the threshold `gamma * N`. This crate provides
//! the divergence calculus, the threshold fixed points that predict its
//! expected stopping time, the fixed-length Gutman tests and their exponent
//! functions, and a deterministic Monte Carlo harness.

// Parameter checks are written as `!(x > 0.0)` on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifiers;
pub mod divergence;
pub mod error;
pub mod exponents;
pub mod fixedpoint;
pub mod probability;
pub mod simulator;

pub use error::{Error, Result};
pub use probability::{Alphabet, Distribution, EmpiricalType, SeedSpec, Symbol};
