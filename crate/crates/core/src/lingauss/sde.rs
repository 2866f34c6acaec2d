//! Linear SDEs `dX = F X dt + K dB` and their exact discretisation.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::kalman::{LgssObservation, StateSpaceModel};
use super::linalg::{expm, symmetrise, GaussianDist};
use crate::error::{Error, Result};

/// Transition `X_t | X_s = x ~ N(T x, Q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTransition {
    pub matrix: DMatrix<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianTransition {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// The transition over `[s, v]` from those over `[s, t]` and `[t, v]`.
    pub fn then(&self, next: &GaussianTransition) -> GaussianTransition {
        let matrix = &next.matrix * &self.matrix;
        let mut cov = &next.matrix * &self.cov * next.matrix.transpose() + &next.cov;
        symmetrise(&mut cov);
        GaussianTransition { matrix, cov }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSde {
    pub drift: DMatrix<f64>,
    pub diffusion: DMatrix<f64>,
    pub initial: GaussianDist,
}

impl LinearSde {
    pub fn new(drift: DMatrix<f64>, diffusion: DMatrix<f64>, initial: GaussianDist) -> Result<Self> {
        let d = drift.nrows();
        if !drift.is_square() || diffusion.nrows() != d || initial.dim() != d {
            return Err(Error::DimensionMismatch("linear SDE"));
        }
        Ok(Self { drift, diffusion, initial })
    }

    pub fn dim(&self) -> usize {
        self.drift.nrows()
    }

    /// Exact transition over `[s, t]` through the Van Loan block matrix
    /// `expm([[F, KKᵀ], [0, -Fᵀ]] (t-s))`.
    pub fn transition(&self, s: f64, t: f64) -> Result<GaussianTransition> {
        if !(t > s) {
            return Err(Error::InvalidArgument("transition requires t > s"));
        }
        let d = self.dim();
        let dt = t - s;
        let mut block = DMatrix::zeros(2 * d, 2 * d);
        let kk = &self.diffusion * self.diffusion.transpose();
        block.view_mut((0, 0), (d, d)).copy_from(&(&self.drift * dt));
        block.view_mut((0, d), (d, d)).copy_from(&(kk * dt));
        block.view_mut((d, d), (d, d)).copy_from(&(self.drift.transpose() * -dt));
        let e = expm(&block);
        let matrix: DMatrix<f64> = e.view((0, 0), (d, d)).into();
        let upper: DMatrix<f64> = e.view((0, d), (d, d)).into();
        let mut cov = upper * matrix.transpose();
        symmetrise(&mut cov);
        Ok(GaussianTransition { matrix, cov })
    }

    /// The state-space model on `grid` with optional observations per grid
    /// point (`None` = missing).
    pub fn discretise(&self, grid: &[f64], observations: Vec<Option<LgssObservation>>) -> Result<StateSpaceModel> {
        if grid.len() < 2 {
            return Err(Error::InvalidArgument("grid needs at least two points"));
        }
        let transitions = grid.windows(2).map(|w| self.transition(w[0], w[1])).collect::<Result<Vec<_>>>()?;
        StateSpaceModel::new(self.initial.clone(), transitions, observations)
    }

    /// The unobserved model on `grid`.
    pub fn discretise_unobserved(&self, grid: &[f64]) -> Result<StateSpaceModel> {
        self.discretise(grid, alloc::vec![None; grid.len()])
    }
}

/// Zero-mean initial law helper.
pub fn centred(cov: DMatrix<f64>) -> GaussianDist {
    let d = cov.nrows();
    GaussianDist { mean: DVector::zeros(d), cov }
}
