//! Kalman filtering and RTS smoothing for discrete linear-Gaussian
//! state-space models, plus conditionals of the smoothing distribution.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::linalg::{robust_cholesky, spd_solve, symmetrise, AffineGaussian, GaussianDist, LN_2PI};
use super::sde::GaussianTransition;
use crate::error::{Error, Result};

/// Observation `y ~ N(Z x, H)` at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct LgssObservation {
    pub matrix: DMatrix<f64>,
    pub cov: DMatrix<f64>,
    pub value: DVector<f64>,
}

impl LgssObservation {
    pub fn new(matrix: DMatrix<f64>, cov: DMatrix<f64>, value: DVector<f64>) -> Result<Self> {
        let p = value.len();
        if matrix.nrows() != p || cov.nrows() != p || cov.ncols() != p {
            return Err(Error::DimensionMismatch("observation"));
        }
        Ok(Self { matrix, cov, value })
    }
}

/// `X_0 ~ initial`, `X_k | X_{k-1} ~ transitions[k-1]`, with an optional
/// observation at every time (`None` = missing).
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    pub initial: GaussianDist,
    pub transitions: Vec<GaussianTransition>,
    pub observations: Vec<Option<LgssObservation>>,
}

impl StateSpaceModel {
    pub fn new(
        initial: GaussianDist,
        transitions: Vec<GaussianTransition>,
        observations: Vec<Option<LgssObservation>>,
    ) -> Result<Self> {
        let d = initial.dim();
        if observations.len() != transitions.len() + 1 {
            return Err(Error::DimensionMismatch("one observation slot per time"));
        }
        if transitions.iter().any(|t| t.matrix.shape() != (d, d) || t.cov.shape() != (d, d)) {
            return Err(Error::DimensionMismatch("transition"));
        }
        if observations.iter().flatten().any(|o| o.matrix.ncols() != d) {
            return Err(Error::DimensionMismatch("observation matrix columns"));
        }
        Ok(Self { initial, transitions, observations })
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.initial.dim()
    }

    pub fn filter(&self) -> Result<FilterOutput> {
        kalman_filter(self)
    }

    pub fn smoother(&self) -> Result<SmootherOutput> {
        kalman_smoother(self, kalman_filter(self)?)
    }
}

#[derive(Debug, Clone)]
pub struct FilterOutput {
    /// `predicted[k]` is the law of `X_k` given `Y_{0:k-1}`.
    pub predicted: Vec<GaussianDist>,
    /// `filtered[k]` is the law of `X_k` given `Y_{0:k}`.
    pub filtered: Vec<GaussianDist>,
    pub log_likelihood: f64,
}

pub fn kalman_filter(model: &StateSpaceModel) -> Result<FilterOutput> {
    let d = model.dim();
    let n = model.len();
    let mut predicted = Vec::with_capacity(n);
    let mut filtered = Vec::with_capacity(n);
    let mut log_likelihood = 0.0;
    let mut pred = model.initial.clone();
    for k in 0..n {
        if k > 0 {
            let tr = &model.transitions[k - 1];
            let prev: &GaussianDist = &filtered[k - 1];
            let mut cov = &tr.matrix * &prev.cov * tr.matrix.transpose() + &tr.cov;
            symmetrise(&mut cov);
            pred = GaussianDist { mean: &tr.matrix * &prev.mean, cov };
        }
        let post = match &model.observations[k] {
            None => pred.clone(),
            Some(obs) => {
                let z = &obs.matrix;
                let innov = &obs.value - z * &pred.mean;
                let s = z * &pred.cov * z.transpose() + &obs.cov;
                let chol = robust_cholesky(&s, "innovation covariance")?;
                let l = chol.l();
                let white = l.solve_lower_triangular(&innov).expect("triangular factor");
                let log_det: f64 = 2.0 * l.diagonal().iter().map(|v| libm::log(*v)).sum::<f64>();
                log_likelihood -= 0.5 * (white.norm_squared() + log_det + innov.len() as f64 * LN_2PI);
                // K = P Zᵀ S⁻¹
                let gain = chol.solve(&(z * &pred.cov)).transpose();
                let mean = &pred.mean + &gain * innov;
                let ikz = DMatrix::identity(d, d) - &gain * z;
                let mut cov = &ikz * &pred.cov * ikz.transpose() + &gain * &obs.cov * gain.transpose();
                symmetrise(&mut cov);
                GaussianDist { mean, cov }
            }
        };
        predicted.push(pred.clone());
        filtered.push(post);
    }
    Ok(FilterOutput { predicted, filtered, log_likelihood })
}

/// Filter output augmented by the RTS backward pass.
#[derive(Debug, Clone)]
pub struct SmootherOutput {
    pub filter: FilterOutput,
    /// `smoothed[k]` is the law of `X_k` given all observations.
    pub smoothed: Vec<GaussianDist>,
    /// Smoother gains `J_k = Σ_{k|k} T_kᵀ Σ_{k+1|k}⁻¹`, `k < n-1`.
    pub gains: Vec<DMatrix<f64>>,
}

pub fn kalman_smoother(model: &StateSpaceModel, filter: FilterOutput) -> Result<SmootherOutput> {
    let n = model.len();
    let mut smoothed = filter.filtered.clone();
    let mut gains = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n.saturating_sub(1) {
        let tr = &model.transitions[k];
        let rhs = &tr.matrix * &filter.filtered[k].cov;
        let gain = spd_solve(&filter.predicted[k + 1].cov, &rhs, "predicted covariance")?.transpose();
        gains.push(gain);
    }
    for k in (0..n.saturating_sub(1)).rev() {
        let gain = &gains[k];
        let next = smoothed[k + 1].clone();
        let pred = &filter.predicted[k + 1];
        let filt = &filter.filtered[k];
        let mean = &filt.mean + gain * (&next.mean - &pred.mean);
        let mut cov = &filt.cov + gain * (&next.cov - &pred.cov) * gain.transpose();
        symmetrise(&mut cov);
        smoothed[k] = GaussianDist { mean, cov };
    }
    Ok(SmootherOutput { filter, smoothed, gains })
}

impl SmootherOutput {
    pub fn len(&self) -> usize {
        self.smoothed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.smoothed.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.smoothed[0].dim()
    }

    fn check(&self, k: usize) -> Result<()> {
        if k >= self.len() {
            return Err(Error::IndexOutOfRange { index: k, len: self.len() });
        }
        Ok(())
    }

    /// `Cov(X_s, X_t | Y)` via `Σ_{s,t} = J_s Σ_{s+1,t}` anchored at
    /// `Σ_{t,t} = Σ_{t|T}`; the transpose is returned when `s > t`.
    pub fn cross_cov(&self, s: usize, t: usize) -> Result<DMatrix<f64>> {
        self.check(s)?;
        self.check(t)?;
        if s > t {
            return Ok(self.cross_cov(t, s)?.transpose());
        }
        let mut acc = self.smoothed[t].cov.clone();
        for j in (s..t).rev() {
            acc = &self.gains[j] * acc;
        }
        Ok(acc)
    }

    /// The law of `X_u` given `X_ℓ` (and the observations) as an affine
    /// kernel in `x_ℓ`.
    pub fn block_conditional(&self, lower: usize, upper: usize) -> Result<AffineGaussian> {
        if lower >= upper {
            return Err(Error::InvalidArgument("block conditional requires lower < upper"));
        }
        self.check(upper)?;
        let cross = self.cross_cov(lower, upper)?;
        let lo = &self.smoothed[lower];
        let up = &self.smoothed[upper];
        let gain = spd_solve(&lo.cov, &cross, "smoothed covariance at block start")?.transpose();
        let offset = &up.mean - &gain * &lo.mean;
        let mut cov = &up.cov - &gain * &cross;
        symmetrise(&mut cov);
        AffineGaussian::new(&gain, &DMatrix::zeros(self.dim(), 0), &offset, &cov, "block covariance")
    }

    /// Log-density of `X_u = x_u` given `X_ℓ = x_ℓ`.
    pub fn block_density(&self, lower: usize, upper: usize, x_lower: &[f64], x_upper: &[f64]) -> Result<f64> {
        Ok(self.block_conditional(lower, upper)?.log_density(x_lower, &[], x_upper))
    }

    fn bridge_parts(&self, k: usize, upper: usize) -> Result<(DMatrix<f64>, DVector<f64>, DMatrix<f64>)> {
        if k == 0 || k >= upper {
            return Err(Error::InvalidArgument("bridge requires 0 < k < upper"));
        }
        self.check(upper)?;
        let d = self.dim();
        let mut joint = DMatrix::zeros(2 * d, 2 * d);
        joint.view_mut((0, 0), (d, d)).copy_from(&self.smoothed[k - 1].cov);
        joint.view_mut((d, d), (d, d)).copy_from(&self.smoothed[upper].cov);
        let c_pu = self.cross_cov(k - 1, upper)?;
        joint.view_mut((0, d), (d, d)).copy_from(&c_pu);
        joint.view_mut((d, 0), (d, d)).copy_from(&c_pu.transpose());
        let mut cross = DMatrix::zeros(d, 2 * d);
        cross.view_mut((0, 0), (d, d)).copy_from(&self.cross_cov(k, k - 1)?);
        cross.view_mut((0, d), (d, d)).copy_from(&self.cross_cov(k, upper)?);
        let gain = spd_solve(&joint, &cross.transpose(), "bridge conditioning covariance")?.transpose();
        let mut mu_j = DVector::zeros(2 * d);
        mu_j.rows_mut(0, d).copy_from(&self.smoothed[k - 1].mean);
        mu_j.rows_mut(d, d).copy_from(&self.smoothed[upper].mean);
        let offset = &self.smoothed[k].mean - &gain * mu_j;
        let mut cov = &self.smoothed[k].cov - &gain * cross.transpose();
        symmetrise(&mut cov);
        Ok((gain, offset, cov))
    }

    /// The law of `X_k` given `X_{k-1}`, `X_u` (and the observations) as an
    /// affine kernel in `(x_{k-1}, x_u)`.
    pub fn bridge_conditional(&self, k: usize, upper: usize) -> Result<AffineGaussian> {
        let d = self.dim();
        let (gain, offset, cov) = self.bridge_parts(k, upper)?;
        let gp: DMatrix<f64> = gain.columns(0, d).into();
        let gu: DMatrix<f64> = gain.columns(d, d).into();
        AffineGaussian::new(&gp, &gu, &offset, &cov, "bridge covariance")
    }

    /// The bridge law evaluated at given endpoints.
    pub fn bridge_sample_dist(&self, k: usize, upper: usize, x_prev: &[f64], x_upper: &[f64]) -> Result<GaussianDist> {
        let d = self.dim();
        let (gain, offset, cov) = self.bridge_parts(k, upper)?;
        let mut x = DVector::zeros(2 * d);
        x.rows_mut(0, d).copy_from_slice(x_prev);
        x.rows_mut(d, d).copy_from_slice(x_upper);
        Ok(GaussianDist { mean: offset + gain * x, cov })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lingauss::sde::{centred, LinearSde};

    fn scalar_model(obs: &[Option<f64>]) -> StateSpaceModel {
        let tr =
            GaussianTransition { matrix: DMatrix::from_element(1, 1, 0.9), cov: DMatrix::from_element(1, 1, 0.19) };
        let observations = obs
            .iter()
            .map(|y| {
                y.map(|v| {
                    LgssObservation::new(
                        DMatrix::from_element(1, 1, 1.0),
                        DMatrix::from_element(1, 1, 1.0),
                        DVector::from_element(1, v),
                    )
                    .unwrap()
                })
            })
            .collect();
        StateSpaceModel::new(centred(DMatrix::from_element(1, 1, 1.0)), alloc::vec![tr; obs.len() - 1], observations)
            .unwrap()
    }

    #[test]
    fn conjugate_update() {
        let m = StateSpaceModel::new(
            centred(DMatrix::from_element(1, 1, 1.0)),
            alloc::vec![],
            alloc::vec![Some(
                LgssObservation::new(
                    DMatrix::from_element(1, 1, 1.0),
                    DMatrix::from_element(1, 1, 1.0),
                    DVector::from_element(1, 1.0),
                )
                .unwrap()
            )],
        )
        .unwrap();
        let f = m.filter().unwrap();
        assert!((f.filtered[0].mean[0] - 0.5).abs() < 1e-15);
        assert!((f.filtered[0].cov[(0, 0)] - 0.5).abs() < 1e-15);
        let want = -0.5 * (0.5 + libm::log(2.0) + LN_2PI);
        assert!((f.log_likelihood - want).abs() < 1e-14);
    }

    #[test]
    fn missing_observations_give_prior_marginals() {
        let m = scalar_model(&[None, None, None]);
        let s = m.smoother().unwrap();
        for k in 0..3 {
            assert!((s.smoothed[k].cov[(0, 0)] - 1.0).abs() < 1e-12);
            assert!(s.smoothed[k].mean[0].abs() < 1e-15);
        }
        assert_eq!(s.filter.log_likelihood, 0.0);
        // Stationary AR(1): Cov(X_0, X_2) = 0.81.
        assert!((s.cross_cov(0, 2).unwrap()[(0, 0)] - 0.81).abs() < 1e-12);
    }

    #[test]
    fn brownian_block_and_bridge() {
        let bm =
            LinearSde::new(DMatrix::zeros(1, 1), DMatrix::identity(1, 1), centred(DMatrix::from_element(1, 1, 1.0)))
                .unwrap();
        let m = bm.discretise_unobserved(&[0.0, 0.5, 1.0, 3.0]).unwrap();
        let s = m.smoother().unwrap();
        let block = s.block_conditional(0, 3).unwrap();
        // Variance 3 over three time units.
        let want = -0.5 * (libm::log(3.0) + LN_2PI);
        assert!((block.log_density(&[0.2], &[], &[0.2]) - want).abs() < 1e-10);
        let b = s.bridge_sample_dist(1, 2, &[0.0], &[0.0]).unwrap();
        assert!(b.mean[0].abs() < 1e-12);
        assert!((b.cov[(0, 0)] - 0.25).abs() < 1e-10);
    }

    #[test]
    fn one_step_block_matches_transition() {
        let m = scalar_model(&[None, Some(0.4), None, Some(-1.0)]);
        let s = m.smoother().unwrap();
        let prior = scalar_model(&[None; 4]).smoother().unwrap();
        let tr = &m.transitions[1];
        let one = AffineGaussian::new(&tr.matrix, &DMatrix::zeros(1, 0), &DVector::zeros(1), &tr.cov, "t").unwrap();
        for (x0, x1) in [(0.3, -0.2), (1.5, 1.0)] {
            let a = prior.block_density(1, 2, &[x0], &[x1]).unwrap();
            assert!((a - one.log_density(&[x0], &[], &[x1])).abs() < 1e-10);
        }
        // Smoothed covariances never exceed the filtered ones.
        for k in 0..4 {
            assert!(s.smoothed[k].cov[(0, 0)] <= s.filter.filtered[k].cov[(0, 0)] + 1e-14);
        }
    }

    #[test]
    fn deterministic_dynamics() {
        let tr = GaussianTransition { matrix: DMatrix::identity(1, 1), cov: DMatrix::zeros(1, 1) };
        let m =
            StateSpaceModel::new(centred(DMatrix::from_element(1, 1, 2.0)), alloc::vec![tr; 3], alloc::vec![None; 4])
                .unwrap();
        let s = m.smoother().unwrap();
        assert!((s.cross_cov(0, 3).unwrap()[(0, 0)] - 2.0).abs() < 1e-12);
        let b = s.bridge_sample_dist(1, 3, &[0.7], &[0.7]).unwrap();
        assert!(b.cov[(0, 0)].abs() < 1e-8);
        assert!((b.mean[0] - 0.7).abs() < 1e-8);
    }
}
