//! The conditional particle filter and its ancestor-tracing update.

use rand::Rng;

use super::model::FkModel;
use super::pf::fill_log_weights;
use super::system::{ParticleSystem, ReferencePath};
use crate::error::{Error, Result};
use crate::resampling::{weights::exp_shifted, weights::Cumulative, Scheme};

/// Draws an index with probabilities proportional to `exp(log_g)`.
pub(crate) fn categorical_log<R: Rng + ?Sized>(log_g: &[f64], time: usize, rng: &mut R) -> Result<usize> {
    let (w, _) = exp_shifted(log_g).map_err(|_| Error::DegenerateRow { time })?;
    Ok(Cumulative::new(&w)?.draw_lower(rng.random::<f64>()))
}

/// Forward sweep with the reference planted at its slots. Returns the
/// system and a final index drawn from the last weights.
pub fn cpf<M: FkModel, R: Rng + ?Sized>(
    model: &M,
    scheme: Scheme,
    reference: &ReferencePath,
    n: usize,
    rng: &mut R,
) -> Result<(ParticleSystem, usize)> {
    if n == 0 {
        return Err(Error::InvalidArgument("at least one particle is required"));
    }
    let t = model.horizon();
    let d = model.dim();
    reference.check(t, d, n)?;
    let mut sys = ParticleSystem::new(t, n, d);
    let b0 = reference.slot(0);
    for i in 0..n {
        if i == b0 {
            sys.state_mut(0, i).copy_from_slice(reference.state(0));
        } else {
            model.sample_initial(rng, sys.state_mut(0, i));
        }
    }
    fill_log_weights(model, &mut sys, 0);
    let mut buf = alloc::vec![0.0; d];
    for k in 0..t - 1 {
        let (bk, bnext) = (reference.slot(k), reference.slot(k + 1));
        if sys.log_weights_at(k)[bk] == f64::NEG_INFINITY || sys.log_weights_at(k)[bk].is_nan() {
            return Err(Error::ReferencePotentialZero { time: k });
        }
        let (w, _) = exp_shifted(sys.log_weights_at(k)).map_err(|_| Error::DegenerateRow { time: k })?;
        let a = scheme.resample_conditional(bk, bnext, &w, rng)?;
        sys.ancestors_at_mut(k).copy_from_slice(&a);
        for (i, &parent) in a.iter().enumerate() {
            if i == bnext {
                buf.copy_from_slice(reference.state(k + 1));
            } else {
                model.sample_transition(k + 1, sys.state(k, parent), rng, &mut buf);
            }
            sys.state_mut(k + 1, i).copy_from_slice(&buf);
        }
        fill_log_weights(model, &mut sys, k + 1);
    }
    if sys.log_weights_at(t - 1)[reference.slot(t - 1)] == f64::NEG_INFINITY {
        return Err(Error::ReferencePotentialZero { time: t - 1 });
    }
    let b_last = categorical_log(sys.log_weights_at(t - 1), t - 1, rng)?;
    Ok((sys, b_last))
}

/// CPF followed by ancestor tracing from the final draw.
pub fn cpf_at<M: FkModel, R: Rng + ?Sized>(
    model: &M,
    scheme: Scheme,
    reference: &ReferencePath,
    n: usize,
    rng: &mut R,
) -> Result<ReferencePath> {
    let (sys, b_last) = cpf(model, scheme, reference, n, rng)?;
    let t = sys.horizon();
    let mut slots = sys.trace(0, t - 1, b_last);
    slots.push(b_last);
    let states = sys.path(&slots);
    ReferencePath::new(sys.dim(), states, slots)
}
