//! Permutations of particle indices: cyclic shifts and the mean partition order.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A bijection on `0..n`, stored together with its inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        let forward: Vec<usize> = (0..n).collect();
        Self { inverse: forward.clone(), forward }
    }

    /// Builds a permutation from its image vector `[p(0), p(1), ...]`.
    pub fn from_vec(forward: Vec<usize>) -> Result<Self> {
        let n = forward.len();
        let mut inverse = alloc::vec![usize::MAX; n];
        for (i, &p) in forward.iter().enumerate() {
            if p >= n || inverse[p] != usize::MAX {
                return Err(Error::InvalidArgument("not a permutation"));
            }
            inverse[p] = i;
        }
        Ok(Self { forward, inverse })
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.forward[i]
    }

    #[inline]
    pub fn apply_inverse(&self, i: usize) -> usize {
        self.inverse[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> Permutation {
        Permutation { forward: self.inverse.clone(), inverse: self.forward.clone() }
    }

    /// `self ∘ other`, i.e. `i ↦ self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch("permutation lengths differ"));
        }
        Permutation::from_vec(other.forward.iter().map(|&j| self.forward[j]).collect())
    }
}

/// Index map of the cyclic shift `σ_s(i) = (i + s) mod n` on zero-based indices.
#[inline]
pub fn shift_index(i: usize, s: isize, n: usize) -> usize {
    let n_i = n as isize;
    ((i as isize + s).rem_euclid(n_i)) as usize
}

/// The cyclic shift of `0..n` by `s` as a [`Permutation`].
pub fn cyclic_shift(s: isize, n: usize) -> Result<Permutation> {
    if n == 0 {
        return Err(Error::InvalidArgument("cyclic shift needs n >= 1"));
    }
    Permutation::from_vec((0..n).map(|i| shift_index(i, s, n)).collect())
}

/// Hoare-style O(N) partition of the indices of `w` around the mean:
/// entries `<= mean` first, entries `> mean` last. Input weights are not modified.
///
/// Entries equal to the mean are always moved to the lower segment, so the
/// upper scan stops on `<=` rather than `<`.
pub fn mean_partition_order(w: &[f64]) -> Permutation {
    let n = w.len();
    let mut order: Vec<usize> = (0..n).collect();
    if n <= 1 {
        return Permutation::identity(n);
    }
    let pivot = mean(w);
    // One-based cursors, as in the classical formulation.
    let mut lo = 0usize;
    let mut hi = n + 1;
    loop {
        while lo < hi.min(n) {
            lo += 1;
            if w[order[lo - 1]] > pivot {
                break;
            }
        }
        while hi > lo {
            hi -= 1;
            if w[order[hi - 1]] <= pivot {
                break;
            }
        }
        if lo == hi {
            break;
        }
        order.swap(lo - 1, hi - 1);
    }
    Permutation::from_vec(order).expect("partition keeps a permutation")
}

/// Checks the mean partition predicate: some prefix is `<= mean`, the rest `> mean`.
pub fn is_mean_partition(w: &[f64], order: &Permutation) -> bool {
    if order.len() != w.len() {
        return false;
    }
    let pivot = mean(w);
    let mut upper = false;
    for &j in order.as_slice() {
        if w[j] > pivot {
            upper = true;
        } else if upper {
            return false;
        }
    }
    true
}

fn mean(w: &[f64]) -> f64 {
    w.iter().sum::<f64>() / w.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_shift_is_identity() {
        assert_eq!(cyclic_shift(0, 4).unwrap(), Permutation::identity(4));
    }

    #[test]
    fn shift_by_one_wraps_last_to_first() {
        // σ_1^3(3) = 1 in one-based indexing.
        assert_eq!(shift_index(2, 1, 3), 0);
    }

    #[test]
    fn shifts_invert_exhaustively() {
        for n in 1..=8usize {
            for k in 0..n as isize {
                let fwd = cyclic_shift(k, n).unwrap();
                let back = cyclic_shift(-k, n).unwrap();
                assert_eq!(back.compose(&fwd).unwrap(), Permutation::identity(n));
                assert_eq!(fwd.inverse(), back);
            }
        }
    }

    #[test]
    fn constant_weights_keep_identity() {
        let p = mean_partition_order(&[0.25; 4]);
        assert_eq!(p, Permutation::identity(4));
    }

    #[test]
    fn below_mean_indices_come_first() {
        let w = [0.4, 0.1, 0.3, 0.2];
        let p = mean_partition_order(&w);
        assert!(is_mean_partition(&w, &p));
        let first: alloc::vec::Vec<usize> = p.as_slice()[..2].to_vec();
        assert!(first.contains(&1) && first.contains(&3));
    }

    #[test]
    fn single_element() {
        assert_eq!(mean_partition_order(&[3.0]), Permutation::identity(1));
    }

    #[test]
    fn ties_at_the_mean_go_low() {
        let w = [0.5, 0.0, 0.25, 0.25];
        let p = mean_partition_order(&w);
        assert!(is_mean_partition(&w, &p));
        assert_eq!(*p.as_slice().last().unwrap(), 0);
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(Permutation::from_vec(alloc::vec![0, 0, 1]).is_err());
        assert!(Permutation::from_vec(alloc::vec![0, 3]).is_err());
    }

    proptest! {
        #[test]
        fn partition_predicate_holds(w in proptest::collection::vec(0.0f64..10.0, 1..40)) {
            let p = mean_partition_order(&w);
            prop_assert!(is_mean_partition(&w, &p));
        }

        #[test]
        fn partition_predicate_holds_with_ties(w in proptest::collection::vec(0u8..4, 1..40)) {
            let w: alloc::vec::Vec<f64> = w.into_iter().map(f64::from).collect();
            let p = mean_partition_order(&w);
            prop_assert!(is_mean_partition(&w, &p));
        }
    }
}
