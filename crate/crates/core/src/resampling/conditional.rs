//! Conditional resamplings: draws of ancestor vectors constrained to
//! `A[k] = i`, distributed as the corresponding unconditional scheme given
//! that constraint. Indices are zero-based throughout.

use alloc::vec::Vec;

use rand::distr::Open01;
use rand::Rng;

use super::permutation::{mean_partition_order, shift_index};
use super::unconditional::killing;
use super::weights::{validate, Cumulative};
use crate::error::{Error, Result};

fn check_indices(i: usize, k: usize, n: usize) -> Result<()> {
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    if k >= n {
        return Err(Error::IndexOutOfRange { index: k, len: n });
    }
    Ok(())
}

fn check_reference(g: &[f64], i: usize, k: usize) -> Result<()> {
    validate(g)?;
    check_indices(i, k, g.len())?;
    if !(g[i] > 0.0) {
        return Err(Error::ReferenceWeightZero { index: i });
    }
    Ok(())
}

/// Multinomial with slot `k` forced to `i`; all other slots drawn
/// independently (in increasing slot order).
pub fn cond_multinomial<R: Rng + ?Sized>(i: usize, k: usize, g: &[f64], rng: &mut R) -> Result<Vec<usize>> {
    check_reference(g, i, k)?;
    let cum = Cumulative::new(g)?;
    Ok((0..g.len()).map(|j| if j == k { i } else { cum.draw_lower(rng.random::<f64>()) }).collect())
}

/// Conditional killing: an unconditional killing draw, a random slot `J`
/// overwritten by `i`, then a cyclic relabelling that moves `J` onto `k`.
pub fn cond_killing<R: Rng + ?Sized>(i: usize, k: usize, g: &[f64], rng: &mut R) -> Result<Vec<usize>> {
    check_reference(g, i, k)?;
    let n = g.len();
    let mut a_bar = killing(g, rng)?;
    let g_max = g.iter().copied().fold(0.0f64, f64::max);
    let rest: f64 = g.iter().enumerate().filter(|&(l, _)| l != i).map(|(_, &x)| x).sum();
    let h: Vec<f64> = (0..n)
        .map(|j| {
            let v = if j == i { 1.0 + rest / g_max } else { 1.0 - g[j] / g_max };
            v.max(0.0)
        })
        .collect();
    let j_slot = Cumulative::new(&h)?.draw_lower(rng.random::<f64>());
    a_bar[j_slot] = i;
    let s = j_slot as isize - k as isize;
    Ok((0..n).map(|j| a_bar[shift_index(j, s, n)]).collect())
}

/// Conditional systematic resampling in mean-partition order.
///
/// Draw order: the branch uniform, the offset `Ū`, then the shift `C̄`.
pub fn cond_systematic_mean_partition<R: Rng + ?Sized>(
    i: usize,
    k: usize,
    g: &[f64],
    rng: &mut R,
) -> Result<Vec<usize>> {
    check_reference(g, i, k)?;
    let branch: f64 = rng.random();
    let v: f64 = rng.sample(Open01);
    let shift_u: f64 = rng.random();
    cond_systematic_mean_partition_from_uniforms(i, k, g, branch, v, shift_u)
}

/// Deterministic core of [`cond_systematic_mean_partition`]: `branch` and
/// `shift_u` lie in `[0,1)`, `v` in `(0,1)`.
pub fn cond_systematic_mean_partition_from_uniforms(
    i: usize,
    k: usize,
    g: &[f64],
    branch: f64,
    v: f64,
    shift_u: f64,
) -> Result<Vec<usize>> {
    let total = validate(g)?;
    check_reference(g, i, k)?;
    let n = g.len();
    let x = n as f64 * g[i] / total;
    let fl = libm::floor(x);
    let r = x - fl;
    let p = r * (fl + 1.0) / x;
    let (u_bar, copies) = if branch < p { (r * v, fl as usize + 1) } else { (r + (1.0 - r) * v, fl as usize) };
    // N^i ≥ 1 is guaranteed: if ⌊x⌋ = 0 then p = 1.
    let copies = copies.clamp(1, n);

    let order = mean_partition_order(g);
    let s0 = order.apply_inverse(i);
    let rotated: Vec<usize> = (0..n).map(|j| order.apply((j + s0) % n)).collect();
    let rotated_g: Vec<f64> = rotated.iter().map(|&j| g[j]).collect();

    let mut a_bar = Vec::with_capacity(n);
    a_bar.resize(copies, i);
    let cum = Cumulative::new(&rotated_g)?;
    let start = a_bar.len();
    cum.stratified_upper(u_bar, start, &mut a_bar);
    for a in a_bar[start..].iter_mut() {
        // Strata past the first N^i lie beyond F(1) = W^i in exact arithmetic.
        if *a == 0 {
            *a = (1..n).find(|&j| rotated_g[j] > 0.0).unwrap_or(0);
        }
        *a = rotated[*a];
    }

    let c_bar = ((shift_u * copies as f64) as usize).min(copies - 1);
    let c = c_bar as isize - k as isize;
    Ok((0..n).map(|j| a_bar[shift_index(j, c, n)]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_particle_returns_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(cond_multinomial(0, 0, &[0.3], &mut rng).unwrap(), [0]);
        assert_eq!(cond_killing(0, 0, &[0.3], &mut rng).unwrap(), [0]);
        assert_eq!(cond_systematic_mean_partition(0, 0, &[0.3], &mut rng).unwrap(), [0]);
    }

    #[test]
    fn zero_reference_weight_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = [0.0, 1.0, 1.0];
        let err = Err(Error::ReferenceWeightZero { index: 0 });
        assert_eq!(cond_multinomial(0, 1, &g, &mut rng), err);
        assert_eq!(cond_killing(0, 1, &g, &mut rng), err);
        assert_eq!(cond_systematic_mean_partition(0, 1, &g, &mut rng), err);
        assert!(cond_killing(3, 0, &g, &mut rng).is_err());
    }

    #[test]
    fn uniform_killing_is_a_pure_shift_of_identity() {
        // h(i|i) = 1 under uniform weights, so J = i and A[j] = j + i - k.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let a = cond_killing(3, 1, &[1.0; 5], &mut rng).unwrap();
            assert_eq!(a, [2, 3, 4, 0, 1]);
        }
    }

    #[test]
    fn uniform_systematic_is_cyclic() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let a = cond_systematic_mean_partition(2, 0, &[1.0; 4], &mut rng).unwrap();
            assert_eq!(a[0], 2);
            let mut sorted = a.clone();
            sorted.sort();
            assert_eq!(sorted, [0, 1, 2, 3]);
            for j in 0..4 {
                assert_eq!(a[(j + 1) % 4], (a[j] + 1) % 4, "{a:?}");
            }
        }
    }

    #[test]
    fn uniform_multinomial_free_slots_vary() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut seen = [0usize; 3];
        for _ in 0..3000 {
            let a = cond_multinomial(1, 0, &[1.0; 3], &mut rng).unwrap();
            assert_eq!(a[0], 1);
            seen[a[1]] += 1;
        }
        assert!(seen.iter().all(|&c| c > 800), "{seen:?}");
    }

    #[test]
    fn reference_copies_match_branch() {
        // N W^i = 1.5: the p-branch yields two copies, the other one.
        let g = [3.0, 1.0, 1.0, 3.0];
        let a = cond_systematic_mean_partition_from_uniforms(0, 2, &g, 0.0, 0.5, 0.0).unwrap();
        assert_eq!(a.iter().filter(|&&x| x == 0).count(), 2);
        assert_eq!(a[2], 0);
        let a = cond_systematic_mean_partition_from_uniforms(0, 2, &g, 0.99, 0.5, 0.0).unwrap();
        assert_eq!(a.iter().filter(|&&x| x == 0).count(), 1);
        assert_eq!(a[2], 0);
    }
}
