//! Unbiased resampling schemes operating on unnormalised weights.
//!
//! All functions return zero-based ancestor indices. Random draws are taken in
//! a fixed order so a seeded generator reproduces the output bit for bit:
//! multinomial draws one uniform per offspring, killing draws a keep-uniform
//! per particle followed (only when the particle is killed) by a categorical
//! uniform, and the systematic variants draw a single uniform.

use alloc::vec::Vec;

use rand::distr::Open01;
use rand::Rng;

use super::permutation::{mean_partition_order, Permutation};
use super::weights::Cumulative;
use crate::error::Result;

/// Independent categorical draws with probabilities proportional to `g`.
pub fn multinomial<R: Rng + ?Sized>(g: &[f64], rng: &mut R) -> Result<Vec<usize>> {
    let cum = Cumulative::new(g)?;
    Ok((0..g.len()).map(|_| cum.draw_lower(rng.random::<f64>())).collect())
}

/// Multinomial resampling driven by explicit uniforms in `[0, 1)`.
pub fn multinomial_from_uniforms(g: &[f64], uniforms: &[f64]) -> Result<Vec<usize>> {
    let cum = Cumulative::new(g)?;
    Ok(uniforms.iter().map(|&u| cum.draw_lower(u)).collect())
}

/// Killing resampling with `g* = max g`: particle `i` survives with
/// probability `g_i / g*`, otherwise its ancestor is redrawn from the
/// weighted pool.
pub fn killing<R: Rng + ?Sized>(g: &[f64], rng: &mut R) -> Result<Vec<usize>> {
    let cum = Cumulative::new(g)?;
    let g_max = g.iter().copied().fold(0.0f64, f64::max);
    let mut out = Vec::with_capacity(g.len());
    for (i, &gi) in g.iter().enumerate() {
        let keep: f64 = rng.random();
        if keep * g_max < gi {
            out.push(i);
        } else {
            out.push(cum.draw_lower(rng.random::<f64>()));
        }
    }
    Ok(out)
}

/// Systematic resampling: a single `Ũ ~ U(0,1)` and strata `(i + Ũ)/N`.
pub fn systematic<R: Rng + ?Sized>(g: &[f64], rng: &mut R) -> Result<Vec<usize>> {
    let u: f64 = rng.sample(Open01);
    systematic_from_uniform(g, u)
}

/// Systematic resampling for a given offset `Ũ ∈ (0,1)`.
pub fn systematic_from_uniform(g: &[f64], u: f64) -> Result<Vec<usize>> {
    let cum = Cumulative::new(g)?;
    let mut out = Vec::with_capacity(g.len());
    cum.stratified_upper(u, 0, &mut out);
    Ok(out)
}

/// Systematic resampling applied to the weights re-indexed by their mean
/// partition order, with indices mapped back through the permutation.
pub fn systematic_mean_partition<R: Rng + ?Sized>(g: &[f64], rng: &mut R) -> Result<Vec<usize>> {
    let u: f64 = rng.sample(Open01);
    systematic_mean_partition_from_uniform(g, u)
}

pub fn systematic_mean_partition_from_uniform(g: &[f64], u: f64) -> Result<Vec<usize>> {
    let order = mean_partition_order(g);
    systematic_in_order(g, &order, u)
}

/// Systematic resampling of `g` visited in the order `order`, mapped back.
pub(crate) fn systematic_in_order(g: &[f64], order: &Permutation, u: f64) -> Result<Vec<usize>> {
    let permuted: Vec<f64> = order.as_slice().iter().map(|&j| g[j]).collect();
    let mut out = systematic_from_uniform(&permuted, u)?;
    for a in out.iter_mut() {
        *a = order.apply(*a);
    }
    Ok(out)
}
