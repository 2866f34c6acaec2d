//! Blocking sequences `0 = T_1 < … < T_L = T-1` (zero-based boundaries).

use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockingSequence {
    boundaries: Vec<usize>,
}

impl BlockingSequence {
    /// Validates strictly increasing boundaries starting at 0.
    pub fn new(boundaries: Vec<usize>) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::InvalidBlocking("a blocking needs at least two boundaries"));
        }
        if boundaries[0] != 0 {
            return Err(Error::InvalidBlocking("the first boundary must be the first time"));
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidBlocking("boundaries must be strictly increasing"));
        }
        Ok(Self { boundaries })
    }

    /// Builds from one-based boundaries `1 = T_1 < … < T_L = T`.
    pub fn from_one_based(boundaries: &[usize]) -> Result<Self> {
        if boundaries.contains(&0) {
            return Err(Error::InvalidBlocking("one-based boundaries start at 1"));
        }
        Self::new(boundaries.iter().map(|b| b - 1).collect())
    }

    /// Every time point is a boundary.
    pub fn dense(horizon: usize) -> Result<Self> {
        Self::new((0..horizon).collect())
    }

    /// A single block covering the horizon.
    pub fn trivial(horizon: usize) -> Result<Self> {
        Self::new(alloc::vec![0, horizon.saturating_sub(1)])
    }

    /// Constant block size with a possibly shorter final block.
    pub fn uniform(horizon: usize, size: usize) -> Result<Self> {
        if size == 0 || horizon < 2 {
            return Err(Error::InvalidBlocking("block size and horizon must be positive"));
        }
        let last = horizon - 1;
        let mut b: Vec<usize> = (0..last).step_by(size).collect();
        b.push(last);
        Self::new(b)
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn horizon(&self) -> usize {
        self.boundaries[self.boundaries.len() - 1] + 1
    }

    pub fn num_blocks(&self) -> usize {
        self.boundaries.len() - 1
    }

    /// `(ℓ, u)` pairs in time order.
    pub fn blocks(&self) -> impl DoubleEndedIterator<Item = (usize, usize)> + ExactSizeIterator + '_ {
        self.boundaries.windows(2).map(|w| (w[0], w[1]))
    }

    /// One-based boundaries.
    pub fn one_based(&self) -> Vec<usize> {
        self.boundaries.iter().map(|b| b + 1).collect()
    }
}
