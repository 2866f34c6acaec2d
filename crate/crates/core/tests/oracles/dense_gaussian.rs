//! Dense joint-Gaussian conditioning of a whole linear-Gaussian state-space
//! model, built without any recursion shared with the Kalman code.

use bridgesmc_core::lingauss::{GaussianDist, GaussianTransition, LgssObservation, StateSpaceModel};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub struct DenseSmoother {
    pub d: usize,
    pub t: usize,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

fn spd<R: Rng>(d: usize, rng: &mut R) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(d, d) * 0.2
}

pub fn random_model<R: Rng>(rng: &mut R) -> StateSpaceModel {
    let d = rng.random_range(1..=2);
    let t = rng.random_range(2..=6);
    let initial = GaussianDist { mean: DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0)), cov: spd(d, rng) };
    let transitions = (1..t)
        .map(|_| GaussianTransition {
            matrix: DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0)),
            cov: spd(d, rng),
        })
        .collect();
    let observations = (0..t)
        .map(|_| {
            rng.random_bool(0.6).then(|| {
                let p = rng.random_range(1..=d);
                LgssObservation::new(
                    DMatrix::from_fn(p, d, |_, _| rng.random_range(-1.0..1.0)),
                    spd(p, rng),
                    DVector::from_fn(p, |_, _| rng.random_range(-2.0..2.0)),
                )
                .unwrap()
            })
        })
        .collect();
    StateSpaceModel::new(initial, transitions, observations).unwrap()
}

impl DenseSmoother {
    pub fn new(m: &StateSpaceModel) -> Self {
        let d = m.initial.dim();
        let t = m.len();
        // Prior joint over X_{0:t-1}: X_k = Φ_k X_{k-1} + W_k.
        let mut mean = DVector::zeros(d * t);
        let mut cov = DMatrix::zeros(d * t, d * t);
        mean.rows_mut(0, d).copy_from(&m.initial.mean);
        cov.view_mut((0, 0), (d, d)).copy_from(&m.initial.cov);
        for k in 1..t {
            let tr = &m.transitions[k - 1];
            let mk = &tr.matrix * mean.rows((k - 1) * d, d);
            mean.rows_mut(k * d, d).copy_from(&mk);
            for s in 0..k {
                let c = &tr.matrix * cov.view(((k - 1) * d, s * d), (d, d));
                cov.view_mut((k * d, s * d), (d, d)).copy_from(&c);
                cov.view_mut((s * d, k * d), (d, d)).copy_from(&c.transpose());
            }
            let ckk = &tr.matrix * cov.view(((k - 1) * d, (k - 1) * d), (d, d)) * tr.matrix.transpose() + &tr.cov;
            cov.view_mut((k * d, k * d), (d, d)).copy_from(&ckk);
        }
        // Stack the observations Y = H X + E.
        let rows: usize = m.observations.iter().flatten().map(|o| o.value.len()).sum();
        if rows == 0 {
            return Self { d, t, mean, cov };
        }
        let mut h = DMatrix::zeros(rows, d * t);
        let mut noise = DMatrix::zeros(rows, rows);
        let mut y = DVector::zeros(rows);
        let mut r = 0;
        for (k, o) in m.observations.iter().enumerate() {
            if let Some(o) = o {
                let p = o.value.len();
                h.view_mut((r, k * d), (p, d)).copy_from(&o.matrix);
                noise.view_mut((r, r), (p, p)).copy_from(&o.cov);
                y.rows_mut(r, p).copy_from(&o.value);
                r += p;
            }
        }
        let s = &h * &cov * h.transpose() + noise;
        let gain = &cov * h.transpose() * s.try_inverse().unwrap();
        let post_mean = &mean + &gain * (y - &h * &mean);
        let post_cov = &cov - &gain * &h * &cov;
        Self { d, t, mean: post_mean, cov: post_cov }
    }

    pub fn block(&self, s: usize, t: usize) -> DMatrix<f64> {
        self.cov.view((s * self.d, t * self.d), (self.d, self.d)).into()
    }

    pub fn mean_at(&self, k: usize) -> DVector<f64> {
        self.mean.rows(k * self.d, self.d).into()
    }

    /// Law of `X_target` given `X_given[i] = values[i]`.
    pub fn conditional(&self, target: usize, given: &[usize], values: &[&[f64]]) -> GaussianDist {
        let d = self.d;
        let g = given.len() * d;
        let mut s_gg = DMatrix::zeros(g, g);
        let mut s_tg = DMatrix::zeros(d, g);
        let mut resid = DVector::zeros(g);
        for (i, &a) in given.iter().enumerate() {
            for (j, &b) in given.iter().enumerate() {
                s_gg.view_mut((i * d, j * d), (d, d)).copy_from(&self.block(a, b));
            }
            s_tg.view_mut((0, i * d), (d, d)).copy_from(&self.block(target, a));
            let v = DVector::from_row_slice(values[i]) - self.mean_at(a);
            resid.rows_mut(i * d, d).copy_from(&v);
        }
        let inv = s_gg.try_inverse().unwrap();
        GaussianDist {
            mean: self.mean_at(target) + &s_tg * &inv * resid,
            cov: self.block(target, target) - &s_tg * inv * s_tg.transpose(),
        }
    }
}

pub fn log_normal(g: &GaussianDist, x: &[f64]) -> f64 {
    let d = g.mean.len();
    let r = DVector::from_row_slice(x) - &g.mean;
    let inv = g.cov.clone().try_inverse().unwrap();
    let quad = (r.transpose() * inv * &r)[(0, 0)];
    -0.5 * (quad + g.cov.determinant().ln() + d as f64 * (2.0 * std::f64::consts::PI).ln())
}
