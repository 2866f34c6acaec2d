//! Experiment driver for `bridgesmc-core`: configuration, model files,
//! chain runs, CSV results and SVG charts.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiment;
pub mod io;
pub mod plot;
pub mod selftest;

pub use error::{CliError, Result};
