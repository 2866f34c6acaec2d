//! Fast sanity checks of the sampling primitives and models.

use bridgesmc_core::blocking::{artificial_system_expected_healthy, artificial_system_simulate};
use bridgesmc_core::models::{ctcrwp_unit_stationary, reflected_normal_logpdf, CtcrwpParams};
use bridgesmc_core::resampling::{killing, multinomial, systematic, systematic_mean_partition, Scheme};
use rand::Rng;

use crate::error::Result;
use crate::experiment::stream_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Sampler = fn(&[f64], &mut rand_chacha::ChaCha8Rng) -> bridgesmc_core::Result<Vec<usize>>;

fn unbiasedness(seed: u64) -> Result<Check> {
    let g = [0.05, 0.3, 0.0, 0.15, 0.4, 0.1];
    let n = g.len();
    let draws = 20_000usize;
    let samplers: [(&str, Sampler); 4] = [
        ("multinomial", |g, r| multinomial(g, r)),
        ("killing", |g, r| killing(g, r)),
        ("systematic", |g, r| systematic(g, r)),
        ("systematic_mp", |g, r| systematic_mean_partition(g, r)),
    ];
    let mut worst = 0.0f64;
    for (s, (_, f)) in samplers.iter().enumerate() {
        let mut rng = stream_rng(seed, s as u64);
        let mut sum = vec![0.0; n];
        let mut sq = vec![0.0; n];
        for _ in 0..draws {
            let mut c = vec![0.0; n];
            for i in f(&g, &mut rng)? {
                c[i] += 1.0;
            }
            for i in 0..n {
                sum[i] += c[i];
                sq[i] += c[i] * c[i];
            }
        }
        for i in 0..n {
            let m = sum[i] / draws as f64;
            let var = (sq[i] / draws as f64 - m * m).max(0.0);
            let want = n as f64 * g[i];
            let se = (var / draws as f64).sqrt();
            let z = if se > 0.0 {
                (m - want).abs() / se
            } else if (m - want).abs() < 1e-12 {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(z);
        }
    }
    Ok(Check { name: "resampling unbiasedness", passed: worst < 4.0, detail: format!("max |z| = {worst:.2}") })
}

fn conditional(seed: u64) -> Result<Check> {
    let g = [0.2, 0.0, 0.5, 0.3];
    let mut rng = stream_rng(seed, 10);
    let mut bad = 0usize;
    let mut total = 0usize;
    for scheme in Scheme::ALL {
        for i in [0usize, 2, 3] {
            for k in 0..g.len() {
                for _ in 0..200 {
                    let a = scheme.resample_conditional(i, k, &g, &mut rng)?;
                    total += 1;
                    bad += (a[k] != i || a.iter().any(|&j| g[j] == 0.0)) as usize;
                }
            }
        }
    }
    Ok(Check {
        name: "conditional resampling keeps the reference",
        passed: bad == 0,
        detail: format!("{bad} of {total} draws violated"),
    })
}

fn reflected_normalisation() -> Check {
    let (a, b, mu, var) = (0.0, 3.0, 2.7, 0.09);
    let m = 20_000;
    let h = (b - a) / m as f64;
    let f = |x: f64| reflected_normal_logpdf(x, mu, var, a, b, 10).exp();
    // The density is defined on the open interval; use one-sided limits at the ends.
    let eps = 1e-12 * (b - a);
    let mut s = f(a + eps) + f(b - eps);
    for j in 1..m {
        s += f(a + j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
    }
    let integral = s * h / 3.0;
    Check {
        name: "reflected normal integrates to one",
        passed: (integral - 1.0).abs() < 1e-6,
        detail: format!("integral = {integral:.9}"),
    }
}

fn ctcrwp_closed_form() -> Result<Check> {
    let (beta_v, beta_x) = ctcrwp_unit_stationary(0.5)?;
    let p = CtcrwpParams { beta_v, beta_x, sigma: 0.5, eta: 1.0, horizon: 1.0, step: 0.25 };
    let closed = p.transition(0.25)?;
    let van_loan = p.sde()?.transition(0.0, 0.25)?;
    let err = (&closed.matrix - &van_loan.matrix).amax().max((&closed.cov - &van_loan.cov).amax());
    let s = p.stationary_cov();
    let unit = (s[(0, 0)] - 1.0).abs().max((s[(1, 1)] - 1.0).abs());
    Ok(Check {
        name: "CTCRW-P transition matches the matrix exponential",
        passed: err < 1e-9 && unit < 1e-9,
        detail: format!("max error {err:.2e}, stationary variance error {unit:.2e}"),
    })
}

fn artificial(seed: u64) -> Result<Check> {
    let mut rng = stream_rng(seed, 20);
    let p: Vec<f64> = (0..9).map(|_| rng.random_range(0.0..1.0)).collect();
    let n = 4;
    let want = artificial_system_expected_healthy(&p, n)?;
    let runs = 20_000;
    let h: Vec<f64> = (0..runs)
        .map(|_| artificial_system_simulate(&p, n, &mut rng).map(|x| x as f64))
        .collect::<bridgesmc_core::Result<_>>()?;
    let m = h.iter().sum::<f64>() / runs as f64;
    let v = h.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (runs - 1) as f64;
    let z = (m - want).abs() / (v / runs as f64).sqrt();
    Ok(Check {
        name: "healthy-particle formula matches simulation",
        passed: z < 4.0,
        detail: format!("mean {m:.4} vs {want:.4} (|z| = {z:.2})"),
    })
}

pub fn run_selftest(seed: u64) -> Result<Vec<Check>> {
    Ok(vec![
        unbiasedness(seed)?,
        conditional(seed)?,
        reflected_normalisation(),
        ctcrwp_closed_form()?,
        artificial(seed)?,
    ])
}
