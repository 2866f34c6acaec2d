//! The particle filter.

use alloc::vec::Vec;

use rand::Rng;

use super::model::FkModel;
use super::system::ParticleSystem;
use crate::error::{Error, Result};
use crate::resampling::{weights::exp_shifted, Scheme};

pub(crate) fn fill_log_weights<M: FkModel>(model: &M, sys: &mut ParticleSystem, k: usize) {
    let n = sys.particles();
    for i in 0..n {
        let lw = if k == 0 {
            model.log_potential(0, None, sys.state(0, i))
        } else {
            let parent = sys.ancestors_at(k - 1)[i];
            model.log_potential(k, Some(sys.state(k - 1, parent)), sys.state(k, i))
        };
        sys.log_weights_at_mut(k)[i] = lw;
    }
}

/// Runs a particle filter with `n` particles and an unconditional scheme.
pub fn particle_filter<M: FkModel, R: Rng + ?Sized>(
    model: &M,
    scheme: Scheme,
    n: usize,
    rng: &mut R,
) -> Result<ParticleSystem> {
    particle_filter_with(model, |g, rng: &mut R| scheme.resample(g, rng), n, rng)
}

/// Particle filter with an arbitrary unconditional resampling function.
pub fn particle_filter_with<M, F, R>(model: &M, mut resample: F, n: usize, rng: &mut R) -> Result<ParticleSystem>
where
    M: FkModel,
    F: FnMut(&[f64], &mut R) -> Result<Vec<usize>>,
    R: Rng + ?Sized,
{
    if n == 0 {
        return Err(Error::InvalidArgument("at least one particle is required"));
    }
    let t = model.horizon();
    let mut sys = ParticleSystem::new(t, n, model.dim());
    for i in 0..n {
        model.sample_initial(rng, sys.state_mut(0, i));
    }
    fill_log_weights(model, &mut sys, 0);
    let mut buf = alloc::vec![0.0; model.dim()];
    for k in 0..t - 1 {
        let (w, _) = exp_shifted(sys.log_weights_at(k)).map_err(|_| Error::DegenerateRow { time: k })?;
        let a = resample(&w, rng).map_err(|e| match e {
            Error::DegenerateWeights => Error::DegenerateRow { time: k },
            e => e,
        })?;
        sys.ancestors_at_mut(k).copy_from_slice(&a);
        for (i, &parent) in a.iter().enumerate() {
            model.sample_transition(k + 1, sys.state(k, parent), rng, &mut buf);
            sys.state_mut(k + 1, i).copy_from_slice(&buf);
        }
        fill_log_weights(model, &mut sys, k + 1);
    }
    if sys.log_weights_at(t - 1).iter().all(|&l| l == f64::NEG_INFINITY) {
        return Err(Error::DegenerateRow { time: t - 1 });
    }
    Ok(sys)
}
