//! Scalar AR(1) with Gaussian observations: a model whose smoothing
//! marginals are known exactly, for invariance checks of CPF kernels.

use bridgesmc_core::blocking::BlockingSequence;
use bridgesmc_core::filters::{kernel_step, plan_blocks, Kernel, ReferencePath};
use bridgesmc_core::lingauss::{
    centred, ChainBridgePlan, GaussianChain, GaussianTransition, LgssObservation, SmootherOutput, StateSpaceModel,
};
use bridgesmc_core::models::{ChainModel, GaussianObservations};
use bridgesmc_core::resampling::Scheme;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub const RHO: f64 = 0.8;
pub const OBS_VAR: f64 = 0.5;

pub struct Ar1 {
    pub model: ChainModel<GaussianObservations>,
    pub smoother: SmootherOutput,
    pub posterior: GaussianChain,
}

/// Observations on every other step, with the rest missing.
pub fn observations(t: usize) -> Vec<Option<f64>> {
    (0..t).map(|k| (k % 3 != 2).then(|| 1.5 * ((k as f64) * 0.9).sin() + 0.3)).collect()
}

pub fn ar1(t: usize) -> Ar1 {
    let q = 1.0 - RHO * RHO;
    let step = GaussianTransition { matrix: DMatrix::from_element(1, 1, RHO), cov: DMatrix::from_element(1, 1, q) };
    let initial = centred(DMatrix::identity(1, 1));
    let ys = observations(t);
    let chain = GaussianChain::from_transitions(initial.clone(), &vec![step.clone(); t - 1]).unwrap();
    let potential = GaussianObservations { values: ys.clone(), variance: OBS_VAR, component: 0 };
    let obs = ys
        .iter()
        .map(|y| {
            y.map(|v| {
                LgssObservation::new(
                    DMatrix::identity(1, 1),
                    DMatrix::from_element(1, 1, OBS_VAR),
                    DVector::from_element(1, v),
                )
                .unwrap()
            })
        })
        .collect();
    let ssm = StateSpaceModel::new(initial, vec![step; t - 1], obs).unwrap();
    let smoother = ssm.smoother().unwrap();
    let posterior = GaussianChain::from_smoother(&smoother).unwrap();
    Ar1 { model: ChainModel::new(chain, potential).unwrap(), smoother, posterior }
}

impl Ar1 {
    pub fn horizon(&self) -> usize {
        self.smoother.len()
    }

    /// Exact smoothing `(mean, variance)` per time.
    pub fn moments(&self) -> Vec<(f64, f64)> {
        self.smoother.smoothed.iter().map(|g| (g.mean[0], g.cov[(0, 0)])).collect()
    }

    /// An exact draw from the smoothing distribution with random slots.
    pub fn exact_path<R: Rng>(&self, n: usize, rng: &mut R) -> ReferencePath {
        let t = self.horizon();
        let mut states = vec![0.0; t];
        self.posterior.sample_initial(rng, &mut states[0..1]);
        for k in 1..t {
            let prev = [states[k - 1]];
            self.posterior.sample_step(k, &prev, rng, &mut states[k..k + 1]);
        }
        let slots = (0..t).map(|_| rng.random_range(0..n)).collect();
        ReferencePath::new(1, states, slots).unwrap()
    }

    pub fn kernels(&self) -> Vec<Kernel<ChainBridgePlan>> {
        let t = self.horizon();
        let blocking = BlockingSequence::new(irregular_blocking(t)).unwrap();
        vec![
            Kernel::AncestorTracing,
            Kernel::BackwardSampling,
            Kernel::Bridge(plan_blocks(&self.model, &blocking).unwrap()),
        ]
    }
}

/// Mixed block sizes `3, 1, 3, …` closed by the final time.
pub fn irregular_blocking(t: usize) -> Vec<usize> {
    let mut b = vec![0];
    let mut cur = 0;
    for size in [3, 1, 3, 2].iter().cycle() {
        cur += size;
        if cur >= t - 1 {
            break;
        }
        b.push(cur);
    }
    b.push(t - 1);
    b
}

/// z-score of `mean(f)` against `exact`, with the standard error from
/// non-overlapping batches (`batches = f.len()` for independent draws).
pub fn z_score(f: &[f64], exact: f64, batches: usize) -> f64 {
    let b = f.len() / batches;
    let means: Vec<f64> = f.chunks_exact(b).map(|c| c.iter().sum::<f64>() / b as f64).collect();
    let a = means.len() as f64;
    let m = means.iter().sum::<f64>() / a;
    let v = means.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (a - 1.0);
    (m - exact) / (v / a).sqrt()
}

/// Largest |z| over times for the mean and for the centred second moment.
pub fn worst_z(samples: &[Vec<f64>], moments: &[(f64, f64)], batches: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, &(mu, var)) in moments.iter().enumerate() {
        let x: Vec<f64> = samples.iter().map(|s| s[k]).collect();
        let sq: Vec<f64> = x.iter().map(|v| (v - mu) * (v - mu)).collect();
        worst = worst.max(z_score(&x, mu, batches).abs()).max(z_score(&sq, var, batches).abs());
    }
    worst
}

/// One kernel application to `reps` exact draws.
pub fn one_sweep<R: Rng>(
    fx: &Ar1,
    kernel: &Kernel<ChainBridgePlan>,
    scheme: Scheme,
    n: usize,
    reps: usize,
    rng: &mut R,
) -> f64 {
    let out: Vec<Vec<f64>> = (0..reps)
        .map(|_| {
            let r = fx.exact_path(n, rng);
            kernel_step(&fx.model, kernel, scheme, &r, n, rng).unwrap().0.states().to_vec()
        })
        .collect();
    worst_z(&out, &fx.moments(), reps)
}

/// A single chain of `iters` kernel applications from an exact draw,
/// with batch-means standard errors over 100 batches.
pub fn long_chain<R: Rng>(
    fx: &Ar1,
    kernel: &Kernel<ChainBridgePlan>,
    scheme: Scheme,
    n: usize,
    iters: usize,
    rng: &mut R,
) -> f64 {
    let mut r = fx.exact_path(n, rng);
    let mut out = Vec::with_capacity(iters);
    for _ in 0..iters {
        r = kernel_step(&fx.model, kernel, scheme, &r, n, rng).unwrap().0;
        out.push(r.states().to_vec());
    }
    worst_z(&out, &fx.moments(), 100)
}
