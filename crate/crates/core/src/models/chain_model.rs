//! Feynman–Kac models whose proposals form a Gauss–Markov chain.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::filters::{BridgeOracle, FkModel, TransitionDensity};
use crate::lingauss::{ChainBridgePlan, GaussianChain};

/// Log-potential `log G_k(x_{k-1}, x_k)`.
pub trait Potential {
    fn log_potential(&self, k: usize, prev: Option<&[f64]>, cur: &[f64]) -> f64;
}

impl<F> Potential for F
where
    F: Fn(usize, Option<&[f64]>, &[f64]) -> f64,
{
    fn log_potential(&self, k: usize, prev: Option<&[f64]>, cur: &[f64]) -> f64 {
        self(k, prev, cur)
    }
}

/// `G ≡ 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Unit;

impl Potential for Unit {
    fn log_potential(&self, _: usize, _: Option<&[f64]>, _: &[f64]) -> f64 {
        0.0
    }
}

/// Independent Gaussian observations of one state component:
/// `G_k(x) = N(y_k; x[component], variance)`, `G_k ≡ 1` where `y_k` is
/// missing.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianObservations {
    pub values: Vec<Option<f64>>,
    pub variance: f64,
    pub component: usize,
}

impl Potential for GaussianObservations {
    fn log_potential(&self, k: usize, _: Option<&[f64]>, cur: &[f64]) -> f64 {
        match self.values[k] {
            None => 0.0,
            Some(y) => {
                let r = y - cur[self.component];
                -0.5 * (r * r / self.variance + libm::log(self.variance) + crate::lingauss::LN_2PI)
            }
        }
    }
}

/// Riemann-sum path-integral weights `log G_k = -|Δ_k| 𝒱(x_k)` with
/// `|Δ_{T-1}| = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathIntegral<V> {
    /// `|Δ_k| = t_{k+1} - t_k` for `k < T-1`.
    pub step_lengths: Vec<f64>,
    pub rate: V,
}

/// A path-integral rate `𝒱(x)`; `+∞` gives zero weight.
pub trait Rate {
    fn rate(&self, x: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64> Rate for F {
    fn rate(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

impl<V: Rate> PathIntegral<V> {
    pub fn from_grid(grid: &[f64], rate: V) -> Self {
        Self { step_lengths: grid.windows(2).map(|w| w[1] - w[0]).collect(), rate }
    }
}

impl<V: Rate> Potential for PathIntegral<V> {
    fn log_potential(&self, k: usize, _: Option<&[f64]>, cur: &[f64]) -> f64 {
        match self.step_lengths.get(k) {
            Some(&dt) if dt > 0.0 => {
                let v = self.rate.rate(cur);
                if v == f64::INFINITY {
                    f64::NEG_INFINITY
                } else {
                    -dt * v
                }
            }
            _ => 0.0,
        }
    }
}

/// Proposals from a [`GaussianChain`] with arbitrary potentials.
#[derive(Debug, Clone)]
pub struct ChainModel<P> {
    pub chain: GaussianChain,
    pub potential: P,
}

impl<P: Potential> ChainModel<P> {
    pub fn new(chain: GaussianChain, potential: P) -> Result<Self> {
        if chain.is_empty() {
            return Err(Error::InvalidArgument("empty chain"));
        }
        Ok(Self { chain, potential })
    }
}

impl<P: Potential> FkModel for ChainModel<P> {
    fn horizon(&self) -> usize {
        self.chain.len()
    }

    fn dim(&self) -> usize {
        self.chain.dim()
    }

    fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        self.chain.sample_initial(rng, out)
    }

    fn sample_transition<R: Rng + ?Sized>(&self, k: usize, prev: &[f64], rng: &mut R, out: &mut [f64]) {
        self.chain.sample_step(k, prev, rng, out)
    }

    fn log_potential(&self, k: usize, prev: Option<&[f64]>, cur: &[f64]) -> f64 {
        self.potential.log_potential(k, prev, cur)
    }
}

impl<P: Potential> TransitionDensity for ChainModel<P> {
    fn log_transition_density(&self, k: usize, prev: &[f64], cur: &[f64]) -> f64 {
        self.chain.log_step_density(k, prev, cur)
    }
}

impl<P> BridgeOracle for ChainModel<P> {
    type Plan = ChainBridgePlan;

    fn plan(&self, lower: usize, upper: usize) -> Result<ChainBridgePlan> {
        self.chain.plan(lower, upper)
    }
}
