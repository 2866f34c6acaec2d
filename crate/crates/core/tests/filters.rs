mod oracles;

use bridgesmc_core::blocking::BlockingSequence;
use bridgesmc_core::filters::{
    cpf, cpf_bbs, cpf_bs, initial_reference, kernel_step, plan_blocks, BridgeOracle, BridgePlan, ReferencePath,
    TransitionDensity,
};
use bridgesmc_core::models::{
    cp_rbm_fk, ctcrwp_fk, ctcrwt_fk, CpRbmParams, CtcrwParams, CtcrwpParams, CtcrwtObservation, TerrainRaster,
};
use bridgesmc_core::resampling::Scheme;
use oracles::ar1::{ar1, irregular_blocking, one_sweep};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

#[test]
fn reference_is_planted_at_its_slots() {
    let fx = ar1(8);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for scheme in Scheme::ALL {
        let r = fx.exact_path(5, &mut rng);
        let (sys, _) = cpf(&fx.model, scheme, &r, 5, &mut rng).unwrap();
        for k in 0..8 {
            assert_eq!(sys.state(k, r.slot(k)), r.state(k));
            if k + 1 < 8 {
                assert_eq!(sys.ancestors_at(k)[r.slot(k + 1)], r.slot(k));
            }
        }
    }
}

#[test]
fn single_particle_keeps_the_reference() {
    let fx = ar1(6);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let r = fx.exact_path(1, &mut rng);
    for kernel in fx.kernels() {
        for scheme in Scheme::ALL {
            let (out, changed) = kernel_step(&fx.model, &kernel, scheme, &r, 1, &mut rng).unwrap();
            assert_eq!(out.states(), r.states());
            if let Some(c) = changed {
                assert!(c.iter().all(|&x| !x));
            }
        }
    }
}

#[test]
fn backward_sampling_is_dense_bridge_sampling() {
    let fx = ar1(9);
    let dense = plan_blocks(&fx.model, &BlockingSequence::dense(9).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for scheme in Scheme::ALL {
        for seed in 0..20 {
            let r = fx.exact_path(4, &mut rng);
            let a = cpf_bs(&fx.model, scheme, &r, 4, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let b = cpf_bbs(&fx.model, &dense, scheme, &r, 4, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(a, b.path);
        }
    }
}

fn assert_one_step_consistent<M>(model: &M, points: &[(Vec<f64>, Vec<f64>)])
where
    M: TransitionDensity + BridgeOracle,
{
    for k in 1..model.horizon() {
        let plan = model.plan(k - 1, k).unwrap();
        for (x, y) in points {
            let a = plan.log_block_density(x, y);
            let b = model.log_transition_density(k, x, y);
            assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()), "k={k}: {a} vs {b}");
        }
    }
}

#[test]
fn block_density_of_one_step_is_the_transition() {
    let fx = ar1(7);
    assert_one_step_consistent(&fx.model, &[(vec![0.3], vec![-0.2]), (vec![1.5], vec![1.0])]);

    let p = CtcrwpParams { beta_v: 0.4, beta_x: 0.9, sigma: 0.5, eta: 1.0, horizon: 1.0, step: 0.125 };
    let pts = [(vec![0.1, -0.4], vec![0.2, 0.3]), (vec![-1.0, 2.0], vec![0.0, 1.5])];
    assert_one_step_consistent(&ctcrwp_fk(&p).unwrap(), &pts);

    let m = cp_rbm_fk(&CpRbmParams::default(), &[0.3], &[0.0, 0.3, 0.5, 1.0]).unwrap();
    assert_one_step_consistent(&m, &[(vec![1.0], vec![1.2]), (vec![2.5], vec![2.0])]);

    let grid: Vec<f64> = (0..=16).map(|k| k as f64 * 0.125).collect();
    let obs = [(0.0, 0.0, 0.0), (1.0, 0.5, 0.2), (2.0, 1.0, -0.3)].map(|(time, x, y)| CtcrwtObservation { time, x, y });
    let params = CtcrwParams { beta: 1.0, sigma: 1.0, eta: 0.2, sigma_l: 0.2 };
    let raster = Arc::new(TerrainRaster::constant(8, 8, 1.0, (-4.0, -4.0), 1.0).unwrap());
    let (m, _) = ctcrwt_fk(&params, &obs, raster, &grid).unwrap();
    let pts = [(vec![0.1, 0.2, -0.1, 0.0], vec![0.0, 0.25, 0.1, 0.05])];
    assert_one_step_consistent(&m, &pts);
}

#[test]
fn bridge_plans_must_tile() {
    let fx = ar1(6);
    let plans = vec![fx.model.plan(0, 2).unwrap(), fx.model.plan(3, 5).unwrap()];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let r = fx.exact_path(3, &mut rng);
    assert!(cpf_bbs(&fx.model, &plans, Scheme::Killing, &r, 3, &mut rng).is_err());
}

#[test]
fn one_sweep_invariance_quick() {
    let fx = ar1(10);
    assert_eq!(irregular_blocking(10), [0, 3, 4, 7, 9]);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for kernel in fx.kernels() {
        for scheme in Scheme::ALL {
            for n in [2, 8] {
                let z = one_sweep(&fx, &kernel, scheme, n, 3000, &mut rng);
                assert!(z < 4.0, "{} {scheme} N={n}: |z|={z:.2}", kernel.name());
            }
        }
    }
}

#[test]
fn initial_reference_retries_with_more_particles() {
    let fx = ar1(5);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let r: ReferencePath = initial_reference(&fx.model, 4, 64, &mut rng).unwrap();
    assert_eq!(r.horizon(), 5);
    assert!(r.slots().iter().all(|&s| s == 0));
}
