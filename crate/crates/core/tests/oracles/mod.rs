#![allow(dead_code)]
pub mod ar1;
pub mod dense_gaussian;
pub mod resampling_law;
