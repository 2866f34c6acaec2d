//! Gauss–Markov chains `X_k = A_k X_{k-1} + b_k + N(0, C_k)` as proposal
//! dynamics, with multi-step densities and bridges obtained by composing
//! one-step kernels.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::kalman::SmootherOutput;
use super::linalg::{robust_cholesky, symmetrise, AffineGaussian, GaussianDist};
use super::sde::GaussianTransition;
use crate::error::{Error, Result};
use crate::filters::{BridgeOracle, BridgePlan};

/// One step `X_k | X_{k-1} = x ~ N(A x + b, C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearKernel {
    pub matrix: DMatrix<f64>,
    pub offset: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl LinearKernel {
    fn identity(d: usize) -> Self {
        Self { matrix: DMatrix::identity(d, d), offset: DVector::zeros(d), cov: DMatrix::zeros(d, d) }
    }

    /// `self` followed by `next`.
    fn then(&self, next: &LinearKernel) -> LinearKernel {
        let mut cov = &next.matrix * &self.cov * next.matrix.transpose() + &next.cov;
        symmetrise(&mut cov);
        LinearKernel { matrix: &next.matrix * &self.matrix, offset: &next.matrix * &self.offset + &next.offset, cov }
    }
}

impl From<&GaussianTransition> for LinearKernel {
    fn from(t: &GaussianTransition) -> Self {
        Self { matrix: t.matrix.clone(), offset: DVector::zeros(t.dim()), cov: t.cov.clone() }
    }
}

#[derive(Debug, Clone)]
pub struct GaussianChain {
    initial: GaussianDist,
    kernels: Vec<LinearKernel>,
    initial_fast: AffineGaussian,
    steps: Vec<AffineGaussian>,
}

impl GaussianChain {
    /// `kernels[k-1]` is the law of `X_k` given `X_{k-1}`.
    pub fn from_kernels(initial: GaussianDist, kernels: Vec<LinearKernel>) -> Result<Self> {
        let d = initial.dim();
        let empty = DMatrix::zeros(d, 0);
        let steps = kernels
            .iter()
            .map(|k| {
                if k.matrix.shape() != (d, d) || k.cov.shape() != (d, d) || k.offset.len() != d {
                    return Err(Error::DimensionMismatch("chain kernel"));
                }
                AffineGaussian::new(&k.matrix, &empty, &k.offset, &k.cov, "transition covariance")
            })
            .collect::<Result<Vec<_>>>()?;
        let initial_fast = AffineGaussian::constant(&initial)?;
        Ok(Self { initial, kernels, initial_fast, steps })
    }

    pub fn from_transitions(initial: GaussianDist, transitions: &[GaussianTransition]) -> Result<Self> {
        Self::from_kernels(initial, transitions.iter().map(LinearKernel::from).collect())
    }

    /// The smoothing distribution of a linear-Gaussian state-space model,
    /// written as a forward Markov chain.
    pub fn from_smoother(smoother: &SmootherOutput) -> Result<Self> {
        let d = smoother.dim();
        let kernels = (1..smoother.len())
            .map(|k| {
                let cross = smoother.cross_cov(k - 1, k)?;
                let prev = &smoother.smoothed[k - 1];
                let cur = &smoother.smoothed[k];
                let chol = robust_cholesky(&prev.cov, "smoothed covariance")?;
                let matrix = chol.solve(&cross).transpose();
                let offset = &cur.mean - &matrix * &prev.mean;
                let mut cov = &cur.cov - &matrix * &cross;
                symmetrise(&mut cov);
                debug_assert_eq!(matrix.shape(), (d, d));
                Ok(LinearKernel { matrix, offset, cov })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_kernels(smoother.smoothed[0].clone(), kernels)
    }

    pub fn len(&self) -> usize {
        self.kernels.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.initial.dim()
    }

    pub fn initial(&self) -> &GaussianDist {
        &self.initial
    }

    pub fn kernel(&self, k: usize) -> &LinearKernel {
        &self.kernels[k - 1]
    }

    pub fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        self.initial_fast.sample(&[], &[], rng, out)
    }

    pub fn sample_step<R: Rng + ?Sized>(&self, k: usize, prev: &[f64], rng: &mut R, out: &mut [f64]) {
        self.steps[k - 1].sample(prev, &[], rng, out)
    }

    pub fn log_step_density(&self, k: usize, prev: &[f64], cur: &[f64]) -> f64 {
        self.steps[k - 1].log_density(prev, &[], cur)
    }

    pub fn log_initial_density(&self, x: &[f64]) -> f64 {
        self.initial_fast.log_density(&[], &[], x)
    }

    /// Composite kernel of `X_u` given `X_ℓ`.
    pub fn block_kernel(&self, lower: usize, upper: usize) -> Result<LinearKernel> {
        if lower >= upper || upper >= self.len() {
            return Err(Error::InvalidArgument("block requires lower < upper < T"));
        }
        let mut acc = LinearKernel::identity(self.dim());
        for k in (lower + 1)..=upper {
            acc = acc.then(&self.kernels[k - 1]);
        }
        Ok(acc)
    }

    /// Marginal law of `X_k`.
    pub fn marginal(&self, k: usize) -> GaussianDist {
        let mut mean = self.initial.mean.clone();
        let mut cov = self.initial.cov.clone();
        for kern in &self.kernels[..k] {
            mean = &kern.matrix * mean + &kern.offset;
            cov = &kern.matrix * cov * kern.matrix.transpose() + &kern.cov;
            symmetrise(&mut cov);
        }
        GaussianDist { mean, cov }
    }
}

/// Precomputed block density and bridges for a block `(ℓ, u)`.
#[derive(Debug, Clone)]
pub struct ChainBridgePlan {
    lower: usize,
    upper: usize,
    block: AffineGaussian,
    bridges: Vec<AffineGaussian>,
}

impl BridgeOracle for GaussianChain {
    type Plan = ChainBridgePlan;

    fn plan(&self, lower: usize, upper: usize) -> Result<ChainBridgePlan> {
        let d = self.dim();
        let empty = DMatrix::zeros(d, 0);
        // to_upper[j] is the kernel of X_u given X_{lower+1+j}.
        let mut to_upper = Vec::with_capacity(upper - lower);
        let mut acc = LinearKernel::identity(d);
        for k in ((lower + 1)..=upper).rev() {
            to_upper.push(acc.clone());
            acc = self.kernels[k - 1].then(&acc);
        }
        to_upper.reverse();
        let block = AffineGaussian::new(&acc.matrix, &empty, &acc.offset, &acc.cov, "block covariance")?;
        let ident = DMatrix::<f64>::identity(d, d);
        let bridges = ((lower + 1)..upper)
            .map(|k| {
                let step = &self.kernels[k - 1];
                let rest = &to_upper[k - lower - 1];
                let s = &rest.matrix * &step.cov * rest.matrix.transpose() + &rest.cov;
                let chol = robust_cholesky(&s, "bridge innovation covariance")?;
                let gain = chol.solve(&(&rest.matrix * &step.cov)).transpose();
                let resid = &ident - &gain * &rest.matrix;
                let gain_prev = &resid * &step.matrix;
                let offset = &resid * &step.offset - &gain * &rest.offset;
                let mut cov = &resid * &step.cov * resid.transpose() + &gain * &rest.cov * gain.transpose();
                symmetrise(&mut cov);
                AffineGaussian::new(&gain_prev, &gain, &offset, &cov, "bridge covariance")
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ChainBridgePlan { lower, upper, block, bridges })
    }
}

impl BridgePlan for ChainBridgePlan {
    fn lower(&self) -> usize {
        self.lower
    }

    fn upper(&self) -> usize {
        self.upper
    }

    fn log_block_density(&self, x_lower: &[f64], x_upper: &[f64]) -> f64 {
        self.block.log_density(x_lower, &[], x_upper)
    }

    fn sample_bridge<R: Rng + ?Sized>(&self, k: usize, prev: &[f64], x_upper: &[f64], rng: &mut R, out: &mut [f64]) {
        self.bridges[k - self.lower - 1].sample(prev, x_upper, rng, out)
    }
}

impl ChainBridgePlan {
    /// Bridge log-density of `x` at time `k`.
    pub fn log_bridge_density(&self, k: usize, prev: &[f64], x_upper: &[f64], x: &[f64]) -> f64 {
        self.bridges[k - self.lower - 1].log_density(prev, x_upper, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lingauss::kalman::{LgssObservation, StateSpaceModel};
    use crate::lingauss::sde::{centred, LinearSde};

    fn observed_model() -> StateSpaceModel {
        let sde = LinearSde::new(
            DMatrix::from_row_slice(2, 2, &[-0.8, 0.0, 1.0, -0.1]),
            DMatrix::from_row_slice(2, 2, &[0.7, 0.0, 0.0, 0.0]),
            GaussianDist {
                mean: DVector::from_vec(alloc::vec![0.1, -0.3]),
                cov: DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.8]),
            },
        )
        .unwrap();
        let obs = |v: f64| {
            Some(
                LgssObservation::new(
                    DMatrix::from_row_slice(1, 2, &[0.0, 1.0]),
                    DMatrix::from_element(1, 1, 0.3),
                    DVector::from_element(1, v),
                )
                .unwrap(),
            )
        };
        sde.discretise(&[0.0, 0.3, 0.5, 1.0, 1.2, 2.0], alloc::vec![obs(0.2), None, obs(-0.4), None, None, obs(1.0)])
            .unwrap()
    }

    #[test]
    fn smoother_chain_matches_joint_route() {
        let s = observed_model().smoother().unwrap();
        let chain = GaussianChain::from_smoother(&s).unwrap();
        for k in 0..s.len() {
            let m = chain.marginal(k);
            assert!((m.mean - &s.smoothed[k].mean).amax() < 1e-9);
            assert!((m.cov - &s.smoothed[k].cov).amax() < 1e-9);
        }
        let x_l = [0.4, -0.1];
        let x_u = [-0.2, 0.9];
        for (l, u) in [(0, 1), (0, 5), (1, 4), (2, 3)] {
            let plan = chain.plan(l, u).unwrap();
            let joint = s.block_density(l, u, &x_l, &x_u).unwrap();
            assert!((plan.log_block_density(&x_l, &x_u) - joint).abs() < 1e-8, "{l} {u}");
            for k in (l + 1)..u {
                let x = [0.3, 0.5];
                let a = plan.log_bridge_density(k, &x_l, &x_u, &x);
                let b = s.bridge_conditional(k, u).unwrap().log_density(&x_l, &x_u, &x);
                assert!((a - b).abs() < 1e-8, "{l} {k} {u}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn one_step_plan_is_the_transition_density() {
        let m = observed_model();
        let chain = GaussianChain::from_transitions(m.initial.clone(), &m.transitions).unwrap();
        let plan = chain.plan(2, 3).unwrap();
        let (a, b) = ([0.1, 0.2], [0.0, -0.3]);
        assert!((plan.log_block_density(&a, &b) - chain.log_step_density(3, &a, &b)).abs() < 1e-12);
    }

    #[test]
    fn prior_chain_matches_unobserved_smoother() {
        let m = observed_model();
        let unobserved =
            StateSpaceModel::new(m.initial.clone(), m.transitions.clone(), alloc::vec![None; m.len()]).unwrap();
        let s = unobserved.smoother().unwrap();
        let chain = GaussianChain::from_transitions(centred(m.initial.cov.clone()), &m.transitions).unwrap();
        let chain = GaussianChain::from_kernels(m.initial.clone(), chain.kernels.clone()).unwrap();
        let plan = chain.plan(1, 5).unwrap();
        let (a, b) = ([0.1, 0.2], [0.0, -0.3]);
        let want = s.block_density(1, 5, &a, &b).unwrap();
        assert!((plan.log_block_density(&a, &b) - want).abs() < 1e-9);
    }
}
