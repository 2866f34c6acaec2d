//! Single-state estimators of the probability that a block update moves
//! the block's lower boundary.

use crate::error::{Error, Result};
use crate::resampling::weights::log_sum_exp;

const NORMALISATION_TOL: f64 = 1e-9;

/// `p_k = ½ Σ |W_i - 1/N|` for normalised weights.
pub fn resampling_rate(w: &[f64]) -> Result<f64> {
    if w.is_empty() {
        return Err(Error::InvalidArgument("empty weight vector"));
    }
    let total: f64 = w.iter().sum();
    if !((total - 1.0).abs() <= NORMALISATION_TOL) {
        return Err(Error::InvalidArgument("weights must be normalised"));
    }
    let inv = 1.0 / w.len() as f64;
    Ok(0.5 * w.iter().map(|x| (x - inv).abs()).sum::<f64>())
}

/// `1 - m_ref / Σ_j m_j` from block densities of the whole pool.
pub fn plu_m(densities: &[f64], reference: usize) -> Result<f64> {
    if reference >= densities.len() {
        return Err(Error::IndexOutOfRange { index: reference, len: densities.len() });
    }
    if densities.iter().any(|d| !(*d >= 0.0)) {
        return Err(Error::InvalidArgument("densities must be non-negative"));
    }
    let total: f64 = densities.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::DegenerateWeights);
    }
    Ok(1.0 - densities[reference] / total)
}

/// [`plu_m`] from log-densities.
pub fn plu_m_log(log_densities: &[f64], reference: usize) -> Result<f64> {
    if reference >= log_densities.len() {
        return Err(Error::IndexOutOfRange { index: reference, len: log_densities.len() });
    }
    let total = log_sum_exp(log_densities);
    if !(total > f64::NEG_INFINITY && total < f64::INFINITY) {
        return Err(Error::DegenerateWeights);
    }
    Ok((1.0 - libm::exp(log_densities[reference] - total)).clamp(0.0, 1.0))
}

/// `1 - c / (c + N - 1)` with `c = m_ref / m_typical`.
pub fn plu_m_alt(reference_density: f64, typical_density: f64, n: usize) -> Result<f64> {
    if !(typical_density > 0.0) {
        return Err(Error::InvalidArgument("typical density must be positive"));
    }
    if !(reference_density >= 0.0) {
        return Err(Error::InvalidArgument("reference density must be non-negative"));
    }
    Ok(from_ratio(reference_density / typical_density, n))
}

fn from_ratio(c: f64, n: usize) -> f64 {
    if c == f64::INFINITY {
        return 0.0;
    }
    1.0 - c / (c + n as f64 - 1.0)
}

/// [`plu_m_alt`] with the typical density taken as the mean over the pool
/// excluding the reference, all in log space.
pub fn plu_m_alt_log(log_densities: &[f64], reference: usize, n: usize) -> Result<f64> {
    let n0 = log_densities.len();
    if reference >= n0 {
        return Err(Error::IndexOutOfRange { index: reference, len: n0 });
    }
    if n0 < 2 {
        return Err(Error::InvalidArgument("the pool needs a non-reference particle"));
    }
    let mut max = f64::NEG_INFINITY;
    for (j, &l) in log_densities.iter().enumerate() {
        if j != reference {
            max = max.max(l);
        }
    }
    if !(max > f64::NEG_INFINITY && max < f64::INFINITY) {
        return Err(Error::InvalidArgument("typical density must be positive"));
    }
    let sum: f64 =
        log_densities.iter().enumerate().filter(|&(j, _)| j != reference).map(|(_, &l)| libm::exp(l - max)).sum();
    let log_typical = max + libm::log(sum / (n0 - 1) as f64);
    Ok(from_ratio(libm::exp(log_densities[reference] - log_typical), n))
}

/// `(1 - 1/N) ∏ (1 - p_k N/(N-1)²)`. Factors below zero are clamped to zero;
/// the flag reports whether that happened.
pub fn plu_g(p: &[f64], n: usize) -> Result<(f64, bool)> {
    if n < 2 {
        return Err(Error::InvalidArgument("PLU needs at least two particles"));
    }
    let nf = n as f64;
    let scale = nf / ((nf - 1.0) * (nf - 1.0));
    let mut out = 1.0 - 1.0 / nf;
    let mut clamped = false;
    for &pk in p {
        let f = 1.0 - pk * scale;
        if f < 0.0 {
            clamped = true;
            return Ok((0.0, clamped));
        }
        out *= f;
    }
    Ok((out, clamped))
}

/// `PLU_G · PLU_M / (1 - 1/N)`, clamped to `[0, 1]`.
pub fn plu_hat(plu_g: f64, plu_m: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument("PLU needs at least two particles"));
    }
    let nf = n as f64;
    Ok((plu_g * plu_m / (1.0 - 1.0 / nf)).clamp(0.0, 1.0))
}
