mod oracles;

use bridgesmc_core::blocking::{
    artificial_system_expected_healthy, artificial_system_simulate, choose_blocking, dyadic_candidate_blockings,
    estimate_plu, evaluate_blocking_candidates, BlockingSequence, TunerConfig,
};
use bridgesmc_core::filters::{particle_filter, BridgeOracle, ParticleSystem};
use bridgesmc_core::lingauss::{centred, GaussianChain, GaussianTransition};
use bridgesmc_core::models::{ChainModel, GaussianObservations};
use bridgesmc_core::resampling::{weights::Cumulative, Scheme};
use nalgebra::DMatrix;
use oracles::ar1::{ar1, RHO};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn normal_pdf(x: f64, mu: f64, var: f64) -> f64 {
    (-(x - mu).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// Direct evaluation of the PLU formulas for the AR(1) fixture.
fn hand_plu(sys: &ParticleSystem, b: &[usize], seq: &BlockingSequence, n_target: usize) -> Vec<f64> {
    let n0 = sys.particles();
    let p: Vec<f64> = (0..sys.horizon() - 1)
        .map(|k| {
            let lw = sys.log_weights_at(k);
            let max = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = lw.iter().map(|l| (l - max).exp()).collect();
            let s: f64 = w.iter().sum();
            0.5 * w.iter().map(|x| (x / s - 1.0 / n0 as f64).abs()).sum::<f64>()
        })
        .collect();
    let nt = n_target as f64;
    seq.blocks()
        .map(|(l, u)| {
            let m = (u - l) as i32;
            let xu = sys.state(u, b[u])[0];
            let dens: Vec<f64> =
                (0..n0).map(|j| normal_pdf(xu, RHO.powi(m) * sys.state(l, j)[0], 1.0 - RHO.powi(2 * m))).collect();
            let plu_m = if n_target == n0 {
                1.0 - dens[b[l]] / dens.iter().sum::<f64>()
            } else {
                let typical = (dens.iter().sum::<f64>() - dens[b[l]]) / (n0 - 1) as f64;
                let c = dens[b[l]] / typical;
                1.0 - c / (c + nt - 1.0)
            };
            let plu_g = (1.0 - 1.0 / nt)
                * p[l..u].iter().map(|pk| (1.0 - pk * nt / (nt - 1.0).powi(2)).max(0.0)).product::<f64>();
            (plu_g * plu_m / (1.0 - 1.0 / nt)).clamp(0.0, 1.0)
        })
        .collect()
}

#[test]
fn estimate_matches_hand_evaluation() {
    let fx = ar1(5);
    let candidates = dyadic_candidate_blockings(5).unwrap();
    let plans: Vec<Vec<_>> =
        candidates.iter().map(|s| s.blocks().map(|(l, u)| fx.model.plan(l, u).unwrap()).collect()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let sys = particle_filter(&fx.model, Scheme::SystematicMeanPartition, 3, &mut rng).unwrap();
        let last = rng.random_range(0..3);
        let mut b = sys.trace(0, 4, last);
        b.push(last);
        for n_target in [3, 2, 5] {
            let (got, _) = estimate_plu(&candidates, &plans, &sys, &b, n_target).unwrap();
            for (s, seq) in candidates.iter().enumerate() {
                let want = hand_plu(&sys, &b, seq, n_target);
                for (g, w) in got[s].iter().zip(&want) {
                    assert!((g - w).abs() < 1e-12, "N={n_target}: {g} vs {w}");
                }
            }
        }
    }
}

#[test]
fn single_run_equals_one_estimate() {
    let fx = ar1(9);
    let candidates = dyadic_candidate_blockings(9).unwrap();
    let config = TunerConfig::new(6, 1);
    let table =
        evaluate_blocking_candidates(&candidates, &fx.model, &fx.model, config, &mut ChaCha8Rng::seed_from_u64(5))
            .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sys = particle_filter(&fx.model, Scheme::SystematicMeanPartition, 6, &mut rng).unwrap();
    let lw = sys.log_weights_at(8);
    let max = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = lw.iter().map(|l| (l - max).exp()).collect();
    let last = Cumulative::new(&w).unwrap().draw_lower(rng.random::<f64>());
    let mut b = sys.trace(0, 8, last);
    b.push(last);
    let plans: Vec<Vec<_>> =
        candidates.iter().map(|s| s.blocks().map(|(l, u)| fx.model.plan(l, u).unwrap()).collect()).collect();
    let (single, _) = estimate_plu(&candidates, &plans, &sys, &b, 6).unwrap();
    assert_eq!(table.values, single);
    assert_eq!(table.runs_used, 1);
}

#[test]
fn evaluation_is_reproducible_and_averages_shrink_noise() {
    let fx = ar1(9);
    let candidates = dyadic_candidate_blockings(9).unwrap();
    let eval = |runs: usize, seed: u64| {
        evaluate_blocking_candidates(
            &candidates,
            &fx.model,
            &fx.model,
            TunerConfig::new(4, runs),
            &mut ChaCha8Rng::seed_from_u64(seed),
        )
        .unwrap()
    };
    assert_eq!(eval(3, 7), eval(3, 7));
    let spread = |runs: usize| {
        let xs: Vec<f64> = (0..60).map(|s| eval(runs, 100 + s).values[1][0]).collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
    };
    let (v1, v8) = (spread(1), spread(8));
    // Variance should fall roughly eightfold.
    assert!(v8 < v1 / 3.0 && v8 > v1 / 24.0, "{v1} vs {v8}");
}

#[test]
fn strong_potentials_every_step_favour_dense_blocks() {
    let t = 17;
    let step = GaussianTransition { matrix: DMatrix::from_element(1, 1, 1.0), cov: DMatrix::from_element(1, 1, 1.0) };
    let chain = GaussianChain::from_transitions(centred(DMatrix::identity(1, 1)), &vec![step; t - 1]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut y = 0.0;
    let values = (0..t)
        .map(|_| {
            y += rng.random_range(-1.0..1.0);
            Some(y)
        })
        .collect();
    let model = ChainModel::new(chain, GaussianObservations { values, variance: 1e-3, component: 0 }).unwrap();
    let tuned = choose_blocking(&model, &model, TunerConfig::new(16, 20), &mut rng).unwrap();
    assert_eq!(tuned.blocking, BlockingSequence::dense(t).unwrap(), "{:?}", tuned.table.means());
}

#[test]
fn trivial_horizon_gives_one_block() {
    let fx = ar1(2);
    let tuned =
        choose_blocking(&fx.model, &fx.model, TunerConfig::new(4, 2), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(tuned.blocking.one_based(), [1, 2]);
}

#[test]
fn artificial_system_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for n in [2usize, 4] {
        let p: Vec<f64> = (0..9).map(|_| rng.random_range(0.0..1.0)).collect();
        let want = artificial_system_expected_healthy(&p, n).unwrap();
        let runs = 100_000;
        let h: Vec<f64> = (0..runs).map(|_| artificial_system_simulate(&p, n, &mut rng).unwrap() as f64).collect();
        let m = h.iter().sum::<f64>() / runs as f64;
        let v = h.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (runs - 1) as f64;
        assert!((m - want).abs() < 4.0 * (v / runs as f64).sqrt(), "N={n}: {m} vs {want}");
    }
}
