//! Contracts between Feynman–Kac models and the particle algorithms.
//!
//! Times are zero-based: the target is
//! `∝ M_0(x_0) G_0(x_0) ∏_{k≥1} M_k(x_k | x_{k-1}) G_k(x_{k-1}, x_k)`
//! over `k = 0..T`.

use rand::Rng;

use crate::error::Result;

/// Proposal dynamics and potentials of a Feynman–Kac model with states in
/// `R^d`.
pub trait FkModel {
    /// Number of time points `T ≥ 1`.
    fn horizon(&self) -> usize;
    fn dim(&self) -> usize;
    fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]);
    /// Draws `X_k ~ M_k(· | prev)` for `k ≥ 1`.
    fn sample_transition<R: Rng + ?Sized>(&self, k: usize, prev: &[f64], rng: &mut R, out: &mut [f64]);
    /// `log G_k(prev, cur)`; `prev` is `None` at `k = 0`. May be `-inf`.
    fn log_potential(&self, k: usize, prev: Option<&[f64]>, cur: &[f64]) -> f64;
}

/// Models whose one-step proposal densities can be evaluated.
pub trait TransitionDensity: FkModel {
    /// `log M_k(cur | prev)`, `k ≥ 1`.
    fn log_transition_density(&self, k: usize, prev: &[f64], cur: &[f64]) -> f64;
}

/// Access to multi-step proposal densities and bridges.
pub trait BridgeOracle {
    type Plan: BridgePlan;
    /// Precomputes everything needed for the block `lower < upper`.
    fn plan(&self, lower: usize, upper: usize) -> Result<Self::Plan>;
}

/// Block-specific quantities: `M_{u|ℓ}` and the bridges `M̄_k`,
/// `ℓ < k < u`.
pub trait BridgePlan {
    fn lower(&self) -> usize;
    fn upper(&self) -> usize;
    /// `log M_{u|ℓ}(x_upper | x_lower)`.
    fn log_block_density(&self, x_lower: &[f64], x_upper: &[f64]) -> f64;
    /// Draws `X_k` given `X_{k-1} = prev` and `X_u = x_upper`.
    fn sample_bridge<R: Rng + ?Sized>(&self, k: usize, prev: &[f64], x_upper: &[f64], rng: &mut R, out: &mut [f64]);
}

impl<T: FkModel + ?Sized> FkModel for &T {
    fn horizon(&self) -> usize {
        (**self).horizon()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        (**self).sample_initial(rng, out)
    }
    fn sample_transition<R: Rng + ?Sized>(&self, k: usize, prev: &[f64], rng: &mut R, out: &mut [f64]) {
        (**self).sample_transition(k, prev, rng, out)
    }
    fn log_potential(&self, k: usize, prev: Option<&[f64]>, cur: &[f64]) -> f64 {
        (**self).log_potential(k, prev, cur)
    }
}

impl<T: TransitionDensity + ?Sized> TransitionDensity for &T {
    fn log_transition_density(&self, k: usize, prev: &[f64], cur: &[f64]) -> f64 {
        (**self).log_transition_density(k, prev, cur)
    }
}

impl<T: BridgeOracle + ?Sized> BridgeOracle for &T {
    type Plan = T::Plan;
    fn plan(&self, lower: usize, upper: usize) -> Result<Self::Plan> {
        (**self).plan(lower, upper)
    }
}
