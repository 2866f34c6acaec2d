//! Conditional particle filters with bridge backward sampling.
//!
//! The crate is `no_std` (with `alloc`): every routine is a pure function of
//! its inputs and a caller-supplied random number generator.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops mirror the matrix formulas they implement.
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod blocking;
pub mod diagnostics;
pub mod error;
pub mod filters;
pub mod lingauss;
pub mod models;
pub mod resampling;

pub use error::{Error, Result};
