//! Post-processing of sampler output: autocorrelation times, lower-boundary
//! update tallies and pointwise credible bands.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Shortest series accepted by [`iact_batch_means`].
pub const MIN_SERIES: usize = 100;

/// Draws of one scalar functional per time point, one row per iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    horizon: usize,
    burn_in: usize,
    samples: Vec<f64>,
}

impl ChainTrace {
    pub fn new(horizon: usize, burn_in: usize) -> Self {
        Self { horizon, burn_in, samples: Vec::new() }
    }

    pub fn with_capacity(horizon: usize, burn_in: usize, iterations: usize) -> Self {
        Self { horizon, burn_in, samples: Vec::with_capacity(horizon * iterations) }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    /// Recorded iterations, including burn-in.
    pub fn iterations(&self) -> usize {
        self.samples.len() / self.horizon.max(1)
    }

    /// Iterations after burn-in.
    pub fn kept(&self) -> usize {
        self.iterations().saturating_sub(self.burn_in)
    }

    pub fn push(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.horizon {
            return Err(Error::DimensionMismatch("trace row length"));
        }
        self.samples.extend_from_slice(row);
        Ok(())
    }

    /// Row `i` (counting burn-in iterations).
    pub fn row(&self, i: usize) -> &[f64] {
        &self.samples[i * self.horizon..(i + 1) * self.horizon]
    }

    /// Post-burn-in series at time `t`.
    pub fn series(&self, t: usize) -> Vec<f64> {
        (self.burn_in..self.iterations()).map(|i| self.samples[i * self.horizon + t]).collect()
    }

    /// [`iact_batch_means`] at every time point.
    pub fn iact(&self) -> Result<Vec<f64>> {
        if self.iterations() <= self.burn_in {
            return Err(Error::InvalidArgument("no iterations after burn-in"));
        }
        (0..self.horizon).map(|t| iact_batch_means(&self.series(t))).collect()
    }
}

/// Sample mean and unbiased variance.
pub fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let ss: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, if x.len() > 1 { ss / (n - 1.0) } else { 0.0 })
}

/// Integrated autocorrelation time by non-overlapping batch means with
/// batch size `⌊√n⌋`; a trailing partial batch is dropped.
pub fn iact_batch_means(x: &[f64]) -> Result<f64> {
    let n = x.len();
    if n < MIN_SERIES {
        return Err(Error::InvalidArgument("series too short for batch means"));
    }
    let (_, var) = mean_var(x);
    if !(var > 0.0) {
        return Err(Error::ConstantChain);
    }
    let b = libm::floor(libm::sqrt(n as f64)) as usize;
    let batches: Vec<f64> = x.chunks_exact(b).map(|c| c.iter().sum::<f64>() / b as f64).collect();
    let (_, var_b) = mean_var(&batches);
    Ok(b as f64 * var_b / var)
}

/// Inverse relative efficiency: IACT scaled by the particle count.
pub fn ire(iact: f64, particles: usize) -> f64 {
    iact * particles as f64
}

/// Per-block counts of iterations in which the lower-boundary state moved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PluTally {
    pub changes: Vec<u64>,
    pub iterations: u64,
}

impl PluTally {
    pub fn new(blocks: usize) -> Self {
        Self { changes: alloc::vec![0; blocks], iterations: 0 }
    }

    pub fn record(&mut self, changed: &[bool]) -> Result<()> {
        if changed.len() != self.changes.len() {
            return Err(Error::DimensionMismatch("one flag per block"));
        }
        for (c, &f) in self.changes.iter_mut().zip(changed) {
            *c += f as u64;
        }
        self.iterations += 1;
        Ok(())
    }

    pub fn empirical_plu(&self) -> Result<Vec<f64>> {
        empirical_plu(&self.changes, self.iterations)
    }
}

/// Fractions `changes[i] / iterations`.
pub fn empirical_plu(changes: &[u64], iterations: u64) -> Result<Vec<f64>> {
    if iterations == 0 {
        return Err(Error::InvalidArgument("no iterations tallied"));
    }
    if changes.iter().any(|&c| c > iterations) {
        return Err(Error::InvalidArgument("more changes than iterations"));
    }
    Ok(changes.iter().map(|&c| c as f64 / iterations as f64).collect())
}

/// Empirical quantile with linear interpolation between order statistics
/// (`sorted` ascending, non-empty).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(x: &[f64]) -> Result<f64> {
    if x.is_empty() || x.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("median of an empty or NaN series"));
    }
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&s, 0.5))
}

/// Post-burn-in quantiles: `out[t][j]` is the `probs[j]` quantile at time `t`.
pub fn credible_intervals(trace: &ChainTrace, probs: &[f64]) -> Result<Vec<Vec<f64>>> {
    if probs.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
        return Err(Error::InvalidArgument("probabilities must lie in (0, 1)"));
    }
    if trace.kept() == 0 {
        return Err(Error::InvalidArgument("no iterations after burn-in"));
    }
    Ok((0..trace.horizon())
        .map(|t| {
            let mut s = trace.series(t);
            s.sort_by(f64::total_cmp);
            probs.iter().map(|&p| quantile_sorted(&s, p)).collect()
        })
        .collect())
}

/// Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::DimensionMismatch("paired series of length ≥ 2"));
    }
    let (mx, vx) = mean_var(x);
    let (my, vy) = mean_var(y);
    if !(vx > 0.0 && vy > 0.0) {
        return Err(Error::ConstantChain);
    }
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (x.len() - 1) as f64;
    Ok(cov / libm::sqrt(vx * vy))
}
