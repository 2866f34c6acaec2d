//! Weight validation, log-domain normalisation and inverse-CDF lookups.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Checks that `g` is a usable vector of unnormalised weights and returns
/// its sum.
pub fn validate(g: &[f64]) -> Result<f64> {
    if g.is_empty() {
        return Err(Error::InvalidArgument("empty weight vector"));
    }
    let mut total = 0.0;
    for &w in g {
        if w.is_nan() || w.is_infinite() {
            return Err(Error::DegenerateWeights);
        }
        if w < 0.0 {
            return Err(Error::InvalidArgument("negative weight"));
        }
        total += w;
    }
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::DegenerateWeights);
    }
    Ok(total)
}

/// Normalised weights `W` from unnormalised `g`.
pub fn normalise(g: &[f64]) -> Result<Vec<f64>> {
    let total = validate(g)?;
    Ok(g.iter().map(|&w| w / total).collect())
}

/// Exponentiates log-weights after subtracting their maximum. Returns the
/// shifted weights (max entry exactly one) together with the shift.
/// `-inf` entries become zero weights; `+inf` or NaN are degenerate.
pub fn exp_shifted(log_g: &[f64]) -> Result<(Vec<f64>, f64)> {
    if log_g.is_empty() {
        return Err(Error::InvalidArgument("empty weight vector"));
    }
    let mut max = f64::NEG_INFINITY;
    for &l in log_g {
        if l.is_nan() || l == f64::INFINITY {
            return Err(Error::DegenerateWeights);
        }
        max = max.max(l);
    }
    if max == f64::NEG_INFINITY {
        return Err(Error::DegenerateWeights);
    }
    Ok((log_g.iter().map(|&l| libm::exp(l - max)).collect(), max))
}

/// `log Σ exp(l_i)` computed stably; `-inf` when every entry is `-inf`.
pub fn log_sum_exp(log_g: &[f64]) -> f64 {
    let max = log_g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return max;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: f64 = log_g.iter().map(|&l| libm::exp(l - max)).sum();
    max + libm::log(s)
}

/// Cumulative sums of a validated weight vector.
#[derive(Debug, Clone)]
pub struct Cumulative<'a> {
    weights: &'a [f64],
    cum: Vec<f64>,
    last_positive: usize,
}

impl<'a> Cumulative<'a> {
    pub fn new(g: &'a [f64]) -> Result<Self> {
        validate(g)?;
        let mut acc = 0.0;
        let cum = g
            .iter()
            .map(|&w| {
                acc += w;
                acc
            })
            .collect();
        let last_positive = g.iter().rposition(|&w| w > 0.0).unwrap_or(0);
        Ok(Self { weights: g, cum, last_positive })
    }

    pub fn total(&self) -> f64 {
        self.cum[self.cum.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.cum.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cum.is_empty()
    }

    /// First `j` with `u · total < F(j)`, for `u ∈ [0, 1)`.
    pub fn draw_lower(&self, u: f64) -> usize {
        let target = u * self.total();
        let j = self.cum.partition_point(|&c| c <= target);
        self.clamp(j)
    }

    /// First `j` with `F(j-1) < t · total ≤ F(j)`, for `t ∈ (0, 1]`.
    pub fn draw_upper(&self, t: f64) -> usize {
        let target = t * self.total();
        let j = self.cum.partition_point(|&c| c < target);
        self.clamp(j)
    }

    /// Pushes `draw_upper((j + u)/N)` for `j = start..N` onto `out`,
    /// where `N` is the number of weights.
    pub fn stratified_upper(&self, u: f64, start: usize, out: &mut Vec<usize>) {
        let n = self.len() as f64;
        let total = self.total();
        let mut j = 0usize;
        for s in start..self.len() {
            let target = (s as f64 + u) / n * total;
            while j < self.cum.len() && self.cum[j] < target {
                j += 1;
            }
            out.push(self.clamp(j));
        }
    }

    /// Maps a raw search result to a valid positive-weight index.
    fn clamp(&self, j: usize) -> usize {
        if j > self.last_positive {
            return self.last_positive;
        }
        let mut k = j;
        while self.weights[k] <= 0.0 {
            k += 1;
        }
        k
    }
}
