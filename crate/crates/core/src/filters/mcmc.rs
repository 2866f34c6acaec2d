//! Iterating CPF kernels as a Markov chain over reference paths.

use alloc::vec::Vec;

use rand::Rng;

use super::bbs::{cpf_bbs, cpf_bs};
use super::cpf::{categorical_log, cpf_at};
use super::model::{BridgePlan, TransitionDensity};
use super::pf::particle_filter;
use super::system::ReferencePath;
use crate::error::{Error, Result};
use crate::resampling::Scheme;

/// The backward pass of a CPF update.
#[derive(Debug, Clone)]
pub enum Kernel<P> {
    AncestorTracing,
    BackwardSampling,
    /// Bridge backward sampling over the blocks of these plans.
    Bridge(Vec<P>),
}

impl<P> Kernel<P> {
    pub fn name(&self) -> &'static str {
        match self {
            Kernel::AncestorTracing => "cpf_at",
            Kernel::BackwardSampling => "cpf_bs",
            Kernel::Bridge(_) => "cpf_bbs",
        }
    }
}

/// One update; bridge kernels also report which block lower boundaries
/// moved.
pub fn kernel_step<M, P, R>(
    model: &M,
    kernel: &Kernel<P>,
    scheme: Scheme,
    reference: &ReferencePath,
    n: usize,
    rng: &mut R,
) -> Result<(ReferencePath, Option<Vec<bool>>)>
where
    M: TransitionDensity,
    P: BridgePlan,
    R: Rng + ?Sized,
{
    match kernel {
        Kernel::AncestorTracing => Ok((cpf_at(model, scheme, reference, n, rng)?, None)),
        Kernel::BackwardSampling => Ok((cpf_bs(model, scheme, reference, n, rng)?, None)),
        Kernel::Bridge(plans) => {
            let out = cpf_bbs(model, plans, scheme, reference, n, rng)?;
            Ok((out.path, Some(out.lower_changed)))
        }
    }
}

/// A starting reference drawn from a particle filter. Filters that
/// degenerate are retried with twice the particles, up to `max_particles`.
/// Slots are reset to `0..` so the path can seed a CPF of any size.
pub fn initial_reference<M, R>(model: &M, particles: usize, max_particles: usize, rng: &mut R) -> Result<ReferencePath>
where
    M: super::model::FkModel,
    R: Rng + ?Sized,
{
    let mut n = particles.max(1);
    loop {
        match particle_filter(model, Scheme::SystematicMeanPartition, n, rng) {
            Ok(sys) => {
                let t = sys.horizon();
                let last = categorical_log(sys.log_weights_at(t - 1), t - 1, rng)?;
                let mut b = sys.trace(0, t - 1, last);
                b.push(last);
                return ReferencePath::new(sys.dim(), sys.path(&b), alloc::vec![0; t]);
            }
            Err(Error::DegenerateRow { time }) => {
                if n >= max_particles {
                    return Err(Error::DegenerateRow { time });
                }
                n = (2 * n).min(max_particles);
            }
            Err(e) => return Err(e),
        }
    }
}
