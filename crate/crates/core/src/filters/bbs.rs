//! Bridge backward sampling: the bridge CPF on one block and the full
//! CPF-BBS sweep over a blocking sequence.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::cpf::{categorical_log, cpf};
use super::model::{BridgeOracle, BridgePlan, FkModel, TransitionDensity};
use super::system::ReferencePath;
use crate::blocking::BlockingSequence;
use crate::error::{Error, Result};
use crate::resampling::{weights::exp_shifted, Scheme};

/// Output of [`bridge_cpf`]: the new block states `x̃_{ℓ..u-1}` and slots
/// `B̃_{ℓ..u-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeOutput {
    pub states: Vec<f64>,
    pub slots: Vec<usize>,
}

/// Inputs describing the particle pool at the block's lower boundary.
#[derive(Debug, Clone, Copy)]
pub struct Pool<'a> {
    /// States at time `ℓ`, particle-major (`N · d`).
    pub states: &'a [f64],
    /// `log G_ℓ` of each pool member (with its own parent).
    pub log_potentials: &'a [f64],
}

/// Bridge CPF on the block `(ℓ, u)` described by `plan`.
///
/// `ref_slots` holds `b*_{ℓ..u-1}` and `ref_states` holds
/// `x*_{ℓ+1..u}`. The reference at time `v` occupies slot `b*_v` both as
/// the conditioning index of the resampling and as the planted value.
pub fn bridge_cpf<M, P, R>(
    model: &M,
    plan: &P,
    scheme: Scheme,
    pool: Pool<'_>,
    ref_slots: &[usize],
    ref_states: &[f64],
    rng: &mut R,
) -> Result<BridgeOutput>
where
    M: FkModel,
    P: BridgePlan,
    R: Rng + ?Sized,
{
    let (lower, upper) = (plan.lower(), plan.upper());
    let d = model.dim();
    let n = pool.log_potentials.len();
    let span = upper - lower;
    if lower >= upper || ref_slots.len() != span || ref_states.len() != span * d || pool.states.len() != n * d {
        return Err(Error::DimensionMismatch("bridge CPF inputs"));
    }
    let x_upper = &ref_states[(span - 1) * d..];
    let root = 1.0 / span as f64;
    let mut log_look: Vec<f64> =
        (0..n).map(|j| plan.log_block_density(&pool.states[j * d..(j + 1) * d], x_upper) * root).collect();

    // layers[v - ℓ - 1] holds bridge particles at time v; anc likewise
    // holds the resampled parents (indices into the previous layer).
    let inner = span - 1;
    let mut layers = vec![0.0; inner * n * d];
    let mut anc = vec![0usize; inner * n];
    let mut cur_log_g = pool.log_potentials.to_vec();
    let mut next_log_g = vec![0.0; n];
    let mut log_w = vec![0.0; n];
    let mut carried = vec![0.0; n];

    for v in (lower + 1)..upper {
        let j = v - lower - 1;
        let (b_prev, b_cur) = (ref_slots[j], ref_slots[j + 1]);
        for i in 0..n {
            log_w[i] = cur_log_g[i] + log_look[i];
        }
        if !(log_w[b_prev] > f64::NEG_INFINITY) {
            return Err(Error::ReferencePotentialZero { time: v - 1 });
        }
        let (w, _) = exp_shifted(&log_w).map_err(|_| Error::DegenerateRow { time: v - 1 })?;
        let a = scheme.resample_conditional(b_prev, b_cur, &w, rng)?;
        let (done, rest) = layers.split_at_mut(j * n * d);
        let prev_layer: &[f64] = if j == 0 { pool.states } else { &done[(j - 1) * n * d..] };
        let layer = &mut rest[..n * d];
        for i in 0..n {
            let parent = &prev_layer[a[i] * d..(a[i] + 1) * d];
            let out = &mut layer[i * d..(i + 1) * d];
            if i == b_cur {
                out.copy_from_slice(&ref_states[j * d..(j + 1) * d]);
            } else {
                plan.sample_bridge(v, parent, x_upper, rng, out);
            }
            next_log_g[i] = model.log_potential(v, Some(parent), out);
            carried[i] = log_look[a[i]];
        }
        anc[j * n..(j + 1) * n].copy_from_slice(&a);
        core::mem::swap(&mut cur_log_g, &mut next_log_g);
        core::mem::swap(&mut log_look, &mut carried);
    }

    let last_layer: &[f64] = if inner == 0 { pool.states } else { &layers[(inner - 1) * n * d..] };
    for i in 0..n {
        let x = &last_layer[i * d..(i + 1) * d];
        log_w[i] = cur_log_g[i] + model.log_potential(upper, Some(x), x_upper) + log_look[i];
    }
    let b_last = categorical_log(&log_w, upper - 1, rng)?;

    let mut slots = vec![0usize; span];
    slots[span - 1] = b_last;
    for j in (0..inner).rev() {
        slots[j] = anc[j * n + slots[j + 1]];
    }
    let mut states = Vec::with_capacity(span * d);
    states.extend_from_slice(&pool.states[slots[0] * d..(slots[0] + 1) * d]);
    for j in 0..inner {
        let o = (j * n + slots[j + 1]) * d;
        states.extend_from_slice(&layers[o..o + d]);
    }
    Ok(BridgeOutput { states, slots })
}

/// Precomputes bridge plans for every block of `blocking`.
pub fn plan_blocks<O: BridgeOracle>(oracle: &O, blocking: &BlockingSequence) -> Result<Vec<O::Plan>> {
    blocking.blocks().map(|(l, u)| oracle.plan(l, u)).collect()
}

/// Result of one CPF-BBS update.
#[derive(Debug, Clone, PartialEq)]
pub struct BbsOutput {
    pub path: ReferencePath,
    /// Per block (in time order): whether the lower-boundary state changed.
    pub lower_changed: Vec<bool>,
}

/// One CPF-BBS update of `reference` with blocks given by `plans` (which
/// must tile the horizon in time order).
pub fn cpf_bbs<M, P, R>(
    model: &M,
    plans: &[P],
    scheme: Scheme,
    reference: &ReferencePath,
    n: usize,
    rng: &mut R,
) -> Result<BbsOutput>
where
    M: FkModel,
    P: BridgePlan,
    R: Rng + ?Sized,
{
    let t = model.horizon();
    let d = model.dim();
    if plans.is_empty()
        || plans[0].lower() != 0
        || plans[plans.len() - 1].upper() != t - 1
        || plans.windows(2).any(|w| w[0].upper() != w[1].lower())
    {
        return Err(Error::InvalidBlocking("bridge plans must tile the horizon"));
    }
    let (sys, b_last) = cpf(model, scheme, reference, n, rng)?;
    let mut states = vec![0.0; t * d];
    let mut slots = vec![0usize; t];
    slots[t - 1] = b_last;
    states[(t - 1) * d..].copy_from_slice(sys.state(t - 1, b_last));
    let mut lower_changed = vec![false; plans.len()];
    let mut ref_states = Vec::new();
    for (idx, plan) in plans.iter().enumerate().rev() {
        let (l, u) = (plan.lower(), plan.upper());
        let b_star = sys.trace(l, u, slots[u]);
        ref_states.clear();
        for v in (l + 1)..u {
            ref_states.extend_from_slice(sys.state(v, b_star[v - l]));
        }
        ref_states.extend_from_slice(sys.state(u, slots[u]));
        let pool = Pool { states: sys.states_at(l), log_potentials: sys.log_weights_at(l) };
        let out = bridge_cpf(model, plan, scheme, pool, &b_star, &ref_states, rng)?;
        lower_changed[idx] = sys.state(l, out.slots[0]) != sys.state(l, b_star[0]);
        slots[l..u].copy_from_slice(&out.slots);
        states[l * d..u * d].copy_from_slice(&out.states);
    }
    Ok(BbsOutput { path: ReferencePath::new(d, states, slots)?, lower_changed })
}

/// One-step "bridge plan" backed by a model's transition density; only
/// blocks of length one are supported.
#[derive(Debug, Clone, Copy)]
pub struct OneStepPlan<'a, M> {
    model: &'a M,
    lower: usize,
}

impl<M: TransitionDensity> BridgePlan for OneStepPlan<'_, M> {
    fn lower(&self) -> usize {
        self.lower
    }

    fn upper(&self) -> usize {
        self.lower + 1
    }

    fn log_block_density(&self, x_lower: &[f64], x_upper: &[f64]) -> f64 {
        self.model.log_transition_density(self.lower + 1, x_lower, x_upper)
    }

    fn sample_bridge<R: Rng + ?Sized>(&self, _: usize, _: &[f64], _: &[f64], _: &mut R, _: &mut [f64]) {
        unreachable!("one-step blocks have no interior bridge draws")
    }
}

/// Backward-sampling CPF: CPF-BBS with the dense blocking, using only
/// one-step transition densities.
pub fn cpf_bs<M, R>(
    model: &M,
    scheme: Scheme,
    reference: &ReferencePath,
    n: usize,
    rng: &mut R,
) -> Result<ReferencePath>
where
    M: TransitionDensity,
    R: Rng + ?Sized,
{
    let plans: Vec<OneStepPlan<'_, M>> = (0..model.horizon() - 1).map(|lower| OneStepPlan { model, lower }).collect();
    Ok(cpf_bbs(model, &plans, scheme, reference, n, rng)?.path)
}
