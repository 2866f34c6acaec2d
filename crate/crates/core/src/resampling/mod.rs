//! Resampling schemes, their conditional counterparts and the permutation
//! helpers they rely on.

mod conditional;
mod permutation;
mod unconditional;
pub mod weights;

use core::fmt;
use core::str::FromStr;

use alloc::vec::Vec;
use rand::Rng;

pub use conditional::{
    cond_killing, cond_multinomial, cond_systematic_mean_partition, cond_systematic_mean_partition_from_uniforms,
};
pub use permutation::{cyclic_shift, is_mean_partition, mean_partition_order, shift_index, Permutation};
pub use unconditional::{
    killing, multinomial, multinomial_from_uniforms, systematic, systematic_from_uniform, systematic_mean_partition,
    systematic_mean_partition_from_uniform,
};

use crate::error::{Error, Result};

/// Resampling schemes that have a conditional version usable inside a CPF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Multinomial,
    Killing,
    SystematicMeanPartition,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Multinomial, Scheme::Killing, Scheme::SystematicMeanPartition];

    pub fn resample<R: Rng + ?Sized>(self, g: &[f64], rng: &mut R) -> Result<Vec<usize>> {
        match self {
            Scheme::Multinomial => multinomial(g, rng),
            Scheme::Killing => killing(g, rng),
            Scheme::SystematicMeanPartition => systematic_mean_partition(g, rng),
        }
    }

    /// Draws ancestors subject to `A[k] = i`.
    pub fn resample_conditional<R: Rng + ?Sized>(
        self,
        i: usize,
        k: usize,
        g: &[f64],
        rng: &mut R,
    ) -> Result<Vec<usize>> {
        match self {
            Scheme::Multinomial => cond_multinomial(i, k, g, rng),
            Scheme::Killing => cond_killing(i, k, g, rng),
            Scheme::SystematicMeanPartition => cond_systematic_mean_partition(i, k, g, rng),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Multinomial => "multinomial",
            Scheme::Killing => "killing",
            Scheme::SystematicMeanPartition => "systematic_mp",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "multinomial" => Ok(Scheme::Multinomial),
            "killing" => Ok(Scheme::Killing),
            "systematic_mp" | "systematic-mp" | "systematic_mean_partition" => Ok(Scheme::SystematicMeanPartition),
            _ => Err(Error::InvalidArgument("unknown resampling scheme")),
        }
    }
}
