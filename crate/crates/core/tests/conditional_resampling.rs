mod oracles;

use std::collections::BTreeMap;

use bridgesmc_core::resampling::{mean_partition_order, Scheme};
use oracles::resampling_law as law;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn reference_law(scheme: Scheme, g: &[f64]) -> law::Law {
    let n = g.len();
    let base = match scheme {
        Scheme::Multinomial => law::multinomial(g),
        Scheme::Killing => law::killing(g),
        Scheme::SystematicMeanPartition => {
            let order = mean_partition_order(g);
            law::systematic_in_order(g, order.as_slice())
        }
    };
    law::symmetrise(&base, n)
}

fn check(scheme: Scheme, g: &[f64], i: usize, k: usize, draws: usize, seed: u64) -> f64 {
    let exact = law::conditional(&reference_law(scheme, g), i, k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..draws {
        let a = scheme.resample_conditional(i, k, g, &mut rng).unwrap();
        assert_eq!(a[k], i);
        *counts.entry(a).or_insert(0usize) += 1;
    }
    law::total_variation(&exact, &counts, draws)
}

#[test]
fn reference_marginal_equals_normalised_weight() {
    for g in [[1.0, 2.0, 1.0], [0.3, 0.0, 0.9], [5.0, 1.0, 0.5]] {
        let s: f64 = g.iter().sum();
        for scheme in Scheme::ALL {
            let l = reference_law(scheme, &g);
            let total: f64 = l.values().sum();
            assert!((total - 1.0).abs() < 1e-12);
            for i in 0..3 {
                for k in 0..3 {
                    let m = law::marginal(&l, i, k);
                    assert!((m - g[i] / s).abs() < 1e-12, "{scheme} {g:?} {i} {k}: {m}");
                }
            }
        }
    }
}

#[test]
fn conditional_laws_match_brute_force() {
    let weights = [[1.0, 2.0, 1.0], [0.2, 0.5, 1.7]];
    for (wi, g) in weights.iter().enumerate() {
        for scheme in Scheme::ALL {
            for i in 0..3 {
                for k in 0..3 {
                    let seed = (wi * 100 + i * 10 + k) as u64;
                    let tv = check(scheme, g, i, k, 20_000, seed);
                    assert!(tv < 0.03, "{scheme} g={g:?} i={i} k={k}: tv {tv}");
                }
            }
        }
    }
}

#[test]
fn two_particle_laws_match_brute_force() {
    for scheme in Scheme::ALL {
        for (i, k) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let tv = check(scheme, &[0.7, 0.3], i, k, 20_000, 5);
            assert!(tv < 0.03, "{scheme} {i} {k}: {tv}");
        }
    }
}
