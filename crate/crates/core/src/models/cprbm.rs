//! Cox process driven by reflected Brownian motion: events arrive with
//! intensity `β exp(-α X)` where `X` is a Brownian motion reflected into
//! `(a, b)`, held constant over each grid cell.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use super::chain_model::{ChainModel, Potential};
use super::reflected::{reflect, reflected_normal_logpdf, DEFAULT_K_TRUNC};
use crate::error::{Error, Result};
use crate::lingauss::{GaussianChain, GaussianDist, LinearKernel, LN_2PI};

/// Event times closer than this are treated as the same grid point.
pub const TIME_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpRbmParams {
    pub sigma: f64,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
    pub k_trunc: usize,
}

impl Default for CpRbmParams {
    fn default() -> Self {
        Self { sigma: 0.3, a: 0.0, b: 3.0, alpha: 1.0, beta: 0.5, k_trunc: DEFAULT_K_TRUNC }
    }
}

impl CpRbmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidArgument("σ must be positive"));
        }
        if !(self.a < self.b) {
            return Err(Error::InvalidArgument("reflection bounds need a < b"));
        }
        if self.k_trunc < 1 {
            return Err(Error::InvalidArgument("reflection truncation must be at least 1"));
        }
        if !(self.beta >= 0.0 && self.alpha.is_finite() && self.beta.is_finite()) {
            return Err(Error::InvalidArgument("intensity parameters must be finite, β ≥ 0"));
        }
        Ok(())
    }

    /// `λ = β exp(-α x)`.
    pub fn intensity(&self, x: f64) -> f64 {
        self.beta * libm::exp(-self.alpha * x)
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidArgument("grid needs at least two points"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || !grid[0].is_finite() || !grid[grid.len() - 1].is_finite() {
        return Err(Error::InvalidArgument("grid must be finite and strictly increasing"));
    }
    Ok(())
}

/// Sorted merge of `grid` and `events`, dropping points within
/// [`TIME_TOLERANCE`] of one already kept.
pub fn augment_grid(grid: &[f64], events: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = grid.iter().chain(events).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup_by(|later, kept| *later - *kept <= TIME_TOLERANCE);
    all
}

/// Cell index `j` with `t_j ≤ τ < t_{j+1}`; an event at the final grid
/// point falls in the zero-length last cell.
fn cell_of(grid: &[f64], t: f64) -> Option<usize> {
    let last = grid.len() - 1;
    if t < grid[0] - TIME_TOLERANCE || t > grid[last] + TIME_TOLERANCE {
        return None;
    }
    let j = grid.partition_point(|&g| g <= t + TIME_TOLERANCE);
    Some(j.saturating_sub(1).min(last))
}

/// Per-cell event indicators; errors when a cell holds more than one event.
pub fn event_cells(grid: &[f64], events: &[f64]) -> Result<Vec<bool>> {
    let mut cells = alloc::vec![false; grid.len()];
    for &t in events {
        let j = cell_of(grid, t).ok_or(Error::InvalidArgument("event outside the grid"))?;
        if cells[j] {
            return Err(Error::MultipleEventsInCell { cell: j });
        }
        cells[j] = true;
    }
    Ok(cells)
}

/// Simulates a Poisson process with rate `rates[k]` on `[grid[k], grid[k+1])`.
pub fn poisson_process_simulate<R: Rng + ?Sized>(grid: &[f64], rates: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    check_grid(grid)?;
    if rates.len() != grid.len() - 1 {
        return Err(Error::DimensionMismatch("one rate per grid cell"));
    }
    let mut events = Vec::new();
    for (w, &rate) in grid.windows(2).zip(rates) {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::InvalidArgument("rates must be finite and non-negative"));
        }
        let mean = rate * (w[1] - w[0]);
        if mean == 0.0 {
            continue;
        }
        let count = Poisson::new(mean).map_err(|_| Error::InvalidArgument("Poisson mean"))?.sample(rng) as usize;
        let start = events.len();
        events.extend((0..count).map(|_| w[0] + rng.random::<f64>() * (w[1] - w[0])));
        events[start..].sort_by(f64::total_cmp);
    }
    Ok(events)
}

/// A latent path and the events it generates on `grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct CpRbmSample {
    pub path: Vec<f64>,
    pub events: Vec<f64>,
}

/// Simulates `X_0 = reflect(N(0,1))`, `X_k = reflect(N(X_{k-1}, |Δ_{k-1}|σ²))`
/// and a Poisson process with intensity `λ(X_k)` on cell `k`.
pub fn simulate_cp_rbm<R: Rng + ?Sized>(params: &CpRbmParams, grid: &[f64], rng: &mut R) -> Result<CpRbmSample> {
    params.validate()?;
    check_grid(grid)?;
    let mut path = Vec::with_capacity(grid.len());
    let z: f64 = rng.sample(StandardNormal);
    path.push(reflect(z, params.a, params.b));
    for w in grid.windows(2) {
        let prev = path[path.len() - 1];
        let z: f64 = rng.sample(StandardNormal);
        path.push(reflect(prev + params.sigma * libm::sqrt(w[1] - w[0]) * z, params.a, params.b));
    }
    let rates: Vec<f64> = path[..path.len() - 1].iter().map(|&x| params.intensity(x)).collect();
    let events = poisson_process_simulate(grid, &rates, rng)?;
    Ok(CpRbmSample { path, events })
}

/// Potentials turning Gaussian random-walk proposals into the reflected
/// dynamics with point-process likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct CpRbmPotential {
    pub params: CpRbmParams,
    /// `|Δ_k|`, zero for the last cell.
    pub cell_lengths: Vec<f64>,
    pub events: Vec<bool>,
    /// Proposal variance into time `k` (`1` at `k = 0`).
    pub proposal_var: Vec<f64>,
}

fn log_normal(x: f64, mu: f64, var: f64) -> f64 {
    let r = x - mu;
    -0.5 * (r * r / var + libm::log(var) + LN_2PI)
}

impl CpRbmPotential {
    /// `log N^r(y; μ, v) - log N(y; μ, v)`.
    pub fn log_density_ratio(&self, k: usize, mean: f64, y: f64) -> f64 {
        let var = self.proposal_var[k];
        let p = &self.params;
        reflected_normal_logpdf(y, mean, var, p.a, p.b, p.k_trunc) - log_normal(y, mean, var)
    }

    /// `-|Δ_k| λ(y) + 1{event in Δ_k} log λ(y)`.
    pub fn log_likelihood_factor(&self, k: usize, y: f64) -> f64 {
        let p = &self.params;
        let mut out = 0.0;
        let dt = self.cell_lengths[k];
        if dt > 0.0 {
            out -= dt * p.intensity(y);
        }
        if self.events[k] {
            out += libm::log(p.beta) - p.alpha * y;
        }
        out
    }
}

impl Potential for CpRbmPotential {
    fn log_potential(&self, k: usize, prev: Option<&[f64]>, cur: &[f64]) -> f64 {
        let y = cur[0];
        let mean = prev.map_or(0.0, |p| p[0]);
        let ratio = self.log_density_ratio(k, mean, y);
        if ratio == f64::NEG_INFINITY {
            return ratio;
        }
        ratio + self.log_likelihood_factor(k, y)
    }
}

pub type CpRbmModel = ChainModel<CpRbmPotential>;

/// The CP-RBM Feynman–Kac model on `grid` (typically [`augment_grid`] of a
/// regular grid and the events): `M_0 = N(0,1)`, `M_k(·|x) = N(x, |Δ_{k-1}|σ²)`.
pub fn cp_rbm_fk(params: &CpRbmParams, events: &[f64], grid: &[f64]) -> Result<CpRbmModel> {
    params.validate()?;
    check_grid(grid)?;
    let events = event_cells(grid, events)?;
    let mut cell_lengths: Vec<f64> = grid.windows(2).map(|w| w[1] - w[0]).collect();
    cell_lengths.push(0.0);
    let s2 = params.sigma * params.sigma;
    let proposal_var: Vec<f64> =
        core::iter::once(1.0).chain(cell_lengths[..grid.len() - 1].iter().map(|dt| dt * s2)).collect();
    let kernels = proposal_var[1..]
        .iter()
        .map(|&v| LinearKernel {
            matrix: DMatrix::identity(1, 1),
            offset: DVector::zeros(1),
            cov: DMatrix::from_element(1, 1, v),
        })
        .collect();
    let initial = GaussianDist::new(DVector::zeros(1), DMatrix::identity(1, 1))?;
    let chain = GaussianChain::from_kernels(initial, kernels)?;
    ChainModel::new(chain, CpRbmPotential { params: *params, cell_lengths, events, proposal_var })
}
