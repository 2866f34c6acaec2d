//! A stylised conditional particle system in which only the reference's
//! lineage spreads; used to check the long-block PLU approximation.

use rand::Rng;

use crate::error::{Error, Result};

/// `E[H_T] = (N-1) ∏_k (1 - p_R^{(k)}/(N-1)²)`, with one probability per
/// step.
pub fn artificial_system_expected_healthy(p_r: &[f64], n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument("the system needs at least two particles"));
    }
    if p_r.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::InvalidArgument("event probabilities must lie in [0, 1]"));
    }
    let m = (n - 1) as f64;
    Ok(p_r.iter().fold(m, |acc, p| acc * (1.0 - p / (m * m))))
}

/// Simulates the number of healthy particles after `p_r.len()` steps.
/// Particle 0 is the reference. At each step an event happens with
/// probability `p_R`; a non-reference particle dies, and one of the other
/// `N-1` particles reproduces into its slot, passing on its health.
pub fn artificial_system_simulate<R: Rng + ?Sized>(p_r: &[f64], n: usize, rng: &mut R) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidArgument("the system needs at least two particles"));
    }
    let mut ill = alloc::vec![false; n];
    ill[0] = true;
    for &p in p_r {
        if rng.random::<f64>() >= p {
            continue;
        }
        let dying = 1 + rng.random_range(0..n - 1);
        let mut parent = rng.random_range(0..n - 1);
        if parent >= dying {
            parent += 1;
        }
        ill[dying] = ill[parent];
    }
    Ok(ill.iter().filter(|&&x| !x).count())
}
