//! Planar correlated random walk conditioned on noisy location fixes, with
//! terrain preferences as a path-integral potential.

use alloc::sync::Arc;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::chain_model::{ChainModel, PathIntegral, Rate};
use super::terrain::TerrainRaster;
use crate::error::{Error, Result};
use crate::lingauss::{GaussianChain, GaussianDist, LgssObservation, LinearSde, SmootherOutput};

/// Velocity reversion `β`, diffusion `σ`, observation sd `η` and initial
/// location sd `σ_L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtcrwParams {
    pub beta: f64,
    pub sigma: f64,
    pub eta: f64,
    pub sigma_l: f64,
}

impl CtcrwParams {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x > 0.0 && x.is_finite();
        if ok(self.beta) && ok(self.sigma) && ok(self.eta) && ok(self.sigma_l) {
            Ok(())
        } else {
            Err(Error::InvalidArgument("CTCRW parameters must be positive"))
        }
    }

    /// State `(V^x, L^x, V^y, L^y)` with the two axes independent.
    pub fn sde(&self, first: &CtcrwtObservation) -> Result<LinearSde> {
        let mut drift = DMatrix::zeros(4, 4);
        let mut diffusion = DMatrix::zeros(4, 4);
        for axis in 0..2 {
            let o = 2 * axis;
            drift[(o, o)] = -self.beta;
            drift[(o + 1, o)] = 1.0;
            diffusion[(o, o)] = self.sigma;
        }
        let var_v = self.sigma * self.sigma / (2.0 * self.beta);
        let var_l = self.sigma_l * self.sigma_l;
        let initial = GaussianDist::new(
            DVector::from_row_slice(&[0.0, first.x, 0.0, first.y]),
            DMatrix::from_diagonal(&DVector::from_row_slice(&[var_v, var_l, var_v, var_l])),
        )?;
        LinearSde::new(drift, diffusion, initial)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtcrwtObservation {
    pub time: f64,
    pub x: f64,
    pub y: f64,
}

/// `𝒱 = -log v` at the location components.
#[derive(Debug, Clone)]
pub struct TerrainRate(pub Arc<TerrainRaster>);

impl Rate for TerrainRate {
    fn rate(&self, x: &[f64]) -> f64 {
        self.0.rate(x[1], x[3])
    }
}

pub type CtcrwtModel = ChainModel<PathIntegral<TerrainRate>>;

/// A clockwise loop of location fixes at integer times `0..=16` around
/// the lakes of [`TerrainRaster::two_lakes`], kept at least a lake radius
/// away from open water.
pub fn two_lakes_track() -> Vec<CtcrwtObservation> {
    (0..=16)
        .map(|k| {
            let angle = core::f64::consts::FRAC_PI_2 - core::f64::consts::TAU * k as f64 / 16.0;
            CtcrwtObservation { time: k as f64, x: 3.0 * libm::cos(angle), y: 0.2 + 2.5 * libm::sin(angle) }
        })
        .collect()
}

fn grid_index(grid: &[f64], t: f64) -> Option<usize> {
    let tol = 1e-9 * t.abs().max(1.0);
    let j = grid.partition_point(|&g| g < t - tol);
    (j < grid.len() && (grid[j] - t).abs() <= tol).then_some(j)
}

/// The CTCRW-T model on `grid`: proposals are the CTCRW conditioned on all
/// observations; potentials penalise time spent on low-coefficient terrain.
/// Also returns the smoother of the conditioned CTCRW.
pub fn ctcrwt_fk(
    params: &CtcrwParams,
    observations: &[CtcrwtObservation],
    raster: Arc<TerrainRaster>,
    grid: &[f64],
) -> Result<(CtcrwtModel, SmootherOutput)> {
    params.validate()?;
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("grid must be strictly increasing with two points"));
    }
    let first = observations
        .iter()
        .min_by(|a, b| a.time.total_cmp(&b.time))
        .ok_or(Error::InvalidArgument("at least one observation is required"))?;
    let matrix = DMatrix::from_row_slice(2, 4, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let cov = DMatrix::identity(2, 2) * (params.eta * params.eta);
    let mut slots: Vec<Option<LgssObservation>> = alloc::vec![None; grid.len()];
    for o in observations {
        let j = grid_index(grid, o.time).ok_or(Error::OffGridObservation { time: o.time })?;
        if slots[j].is_some() {
            return Err(Error::InvalidArgument("two observations at one grid point"));
        }
        slots[j] = Some(LgssObservation::new(matrix.clone(), cov.clone(), DVector::from_row_slice(&[o.x, o.y]))?);
    }
    let smoother = params.sde(first)?.discretise(grid, slots)?.smoother()?;
    let chain = GaussianChain::from_smoother(&smoother)?;
    let model = ChainModel::new(chain, PathIntegral::from_grid(grid, TerrainRate(raster)))?;
    Ok((model, smoother))
}
