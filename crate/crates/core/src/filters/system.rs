//! Flat storage for particle systems and reference trajectories.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// States `X_k^{(i)}`, ancestors `A_k^{(i)}` (the parent at time `k` of
/// particle `i` at time `k+1`) and log-potentials `log G_k` of one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSystem {
    horizon: usize,
    particles: usize,
    dim: usize,
    states: Vec<f64>,
    ancestors: Vec<usize>,
    log_weights: Vec<f64>,
}

impl ParticleSystem {
    pub(crate) fn new(horizon: usize, particles: usize, dim: usize) -> Self {
        Self {
            horizon,
            particles,
            dim,
            states: vec![0.0; horizon * particles * dim],
            ancestors: vec![0; horizon.saturating_sub(1) * particles],
            log_weights: vec![0.0; horizon * particles],
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn state(&self, k: usize, i: usize) -> &[f64] {
        let o = (k * self.particles + i) * self.dim;
        &self.states[o..o + self.dim]
    }

    pub(crate) fn state_mut(&mut self, k: usize, i: usize) -> &mut [f64] {
        let o = (k * self.particles + i) * self.dim;
        &mut self.states[o..o + self.dim]
    }

    /// All states at time `k`, particle-major.
    pub fn states_at(&self, k: usize) -> &[f64] {
        let o = k * self.particles * self.dim;
        &self.states[o..o + self.particles * self.dim]
    }

    /// Ancestor vector `A_k`, `k < T-1`.
    pub fn ancestors_at(&self, k: usize) -> &[usize] {
        &self.ancestors[k * self.particles..(k + 1) * self.particles]
    }

    pub(crate) fn ancestors_at_mut(&mut self, k: usize) -> &mut [usize] {
        &mut self.ancestors[k * self.particles..(k + 1) * self.particles]
    }

    /// `log G_k` of all particles at time `k`.
    pub fn log_weights_at(&self, k: usize) -> &[f64] {
        &self.log_weights[k * self.particles..(k + 1) * self.particles]
    }

    pub(crate) fn log_weights_at_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.log_weights[k * self.particles..(k + 1) * self.particles]
    }

    /// Indices `b_{ℓ..u-1}` reached by tracing back from `b_u`.
    pub fn trace(&self, lower: usize, upper: usize, b_upper: usize) -> Vec<usize> {
        let mut out = vec![0; upper - lower];
        let mut b = b_upper;
        for v in (lower..upper).rev() {
            b = self.ancestors_at(v)[b];
            out[v - lower] = b;
        }
        out
    }

    /// The trajectory through slots `b` (one per time).
    pub fn path(&self, b: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(b.len() * self.dim);
        for (k, &i) in b.iter().enumerate() {
            out.extend_from_slice(self.state(k, i));
        }
        out
    }

    /// Log of the normalising-constant estimate
    /// `∑_k log(N⁻¹ ∑_i G_k^{(i)})`.
    pub fn log_evidence(&self) -> f64 {
        let n = self.particles as f64;
        (0..self.horizon).map(|k| crate::resampling::weights::log_sum_exp(self.log_weights_at(k)) - libm::log(n)).sum()
    }
}

/// `AncestorTrace`: `ancestors[j]` holds `a_{ℓ+j}`; returns `b_{ℓ..u-1}`
/// with `b_v = a_v[b_{v+1}]`.
pub fn ancestor_trace<A: AsRef<[usize]>>(ancestors: &[A], b_upper: usize) -> Vec<usize> {
    let mut out = vec![0; ancestors.len()];
    let mut b = b_upper;
    for (j, a) in ancestors.iter().enumerate().rev() {
        b = a.as_ref()[b];
        out[j] = b;
    }
    out
}

/// A trajectory `x*_{0..T}` together with the slots `B_{0..T}` it occupies.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePath {
    dim: usize,
    states: Vec<f64>,
    slots: Vec<usize>,
}

impl ReferencePath {
    pub fn new(dim: usize, states: Vec<f64>, slots: Vec<usize>) -> Result<Self> {
        if dim == 0 || states.len() != slots.len() * dim || slots.is_empty() {
            return Err(Error::DimensionMismatch("reference path"));
        }
        Ok(Self { dim, states, slots })
    }

    pub fn horizon(&self) -> usize {
        self.slots.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn slots(&self) -> &[usize] {
        &self.slots
    }

    pub fn slot(&self, k: usize) -> usize {
        self.slots[k]
    }

    /// Component `c` of the state at every time.
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.states.chunks(self.dim).map(|s| s[c]).collect()
    }

    pub(crate) fn check(&self, horizon: usize, dim: usize, particles: usize) -> Result<()> {
        if self.horizon() != horizon || self.dim != dim {
            return Err(Error::DimensionMismatch("reference path does not match the model"));
        }
        if let Some(&b) = self.slots.iter().find(|&&b| b >= particles) {
            return Err(Error::IndexOutOfRange { index: b, len: particles });
        }
        Ok(())
    }
}
