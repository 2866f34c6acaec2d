//! Dense linear-algebra helpers: matrix exponential, jitter-repaired
//! Cholesky factorisation and flat affine-Gaussian kernels for hot loops.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Matrix exponential by scaling and squaring with a diagonal Padé(6,6)
/// approximant.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(a.is_square(), "expm requires a square matrix");
    let n = a.nrows();
    let norm = (0..n).map(|i| (0..n).map(|j| a[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = libm::ceil(libm::log2(norm / 0.5)) as u32;
    }
    let scaled = a / libm::pow(2.0, squarings as f64);

    const Q: usize = 6;
    let mut coeffs = [1.0f64; Q + 1];
    for j in 1..=Q {
        coeffs[j] = coeffs[j - 1] * (Q - j + 1) as f64 / (j * (2 * Q - j + 1)) as f64;
    }
    let ident = DMatrix::<f64>::identity(n, n);
    let mut num = ident.clone() * coeffs[0];
    let mut den = ident.clone() * coeffs[0];
    let mut power = ident;
    for (j, &c) in coeffs.iter().enumerate().skip(1) {
        power = &power * &scaled;
        num += &power * c;
        den += &power * (if j % 2 == 0 { c } else { -c });
    }
    let mut result = den.lu().solve(&num).expect("Padé denominator is nonsingular for scaled arguments");
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Symmetrises `m` in place.
pub fn symmetrise(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Cholesky factor of a covariance after symmetrisation; on failure a
/// single jitter of `1e-10 · trace/d` is added before giving up.
pub fn robust_cholesky(m: &DMatrix<f64>, context: &'static str) -> Result<Cholesky<f64, Dyn>> {
    let mut s = m.clone();
    symmetrise(&mut s);
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotPositiveDefinite { context });
    }
    if let Some(c) = Cholesky::new(s.clone()) {
        return Ok(c);
    }
    let d = s.nrows().max(1) as f64;
    let scale = (s.trace() / d).abs().max(f64::MIN_POSITIVE);
    let jitter = 1e-10 * scale;
    for i in 0..s.nrows() {
        s[(i, i)] += jitter;
    }
    Cholesky::new(s).ok_or(Error::NotPositiveDefinite { context })
}

/// Solves `m x = rhs` for symmetric positive definite `m`.
pub fn spd_solve(m: &DMatrix<f64>, rhs: &DMatrix<f64>, context: &'static str) -> Result<DMatrix<f64>> {
    Ok(robust_cholesky(m, context)?.solve(rhs))
}

/// A multivariate normal law.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDist {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianDist {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::DimensionMismatch("covariance and mean"));
        }
        Ok(Self { mean, cov })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn log_pdf(&self, x: &[f64]) -> Result<f64> {
        Ok(AffineGaussian::constant(self)?.log_density(&[], &[], x))
    }
}

/// `N(P x + U y + c, L Lᵀ)` for inputs `x` (dimension `d_prev`) and an
/// optional second input `y`, with matrices stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineGaussian {
    dim: usize,
    d_prev: usize,
    d_upper: usize,
    gain_prev: Vec<f64>,
    gain_upper: Vec<f64>,
    offset: Vec<f64>,
    chol: Vec<f64>,
    log_norm: f64,
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            v.push(m[(i, j)]);
        }
    }
    v
}

impl AffineGaussian {
    /// Builds the kernel; `gain_prev` and `gain_upper` may have zero columns.
    pub fn new(
        gain_prev: &DMatrix<f64>,
        gain_upper: &DMatrix<f64>,
        offset: &DVector<f64>,
        cov: &DMatrix<f64>,
        context: &'static str,
    ) -> Result<Self> {
        let dim = offset.len();
        if gain_prev.nrows() != dim && gain_prev.ncols() > 0
            || gain_upper.nrows() != dim && gain_upper.ncols() > 0
            || cov.nrows() != dim
            || cov.ncols() != dim
        {
            return Err(Error::DimensionMismatch("affine Gaussian kernel"));
        }
        let l = robust_cholesky(cov, context)?.unpack();
        let log_det_half: f64 = (0..dim).map(|i| libm::log(l[(i, i)])).sum();
        Ok(Self {
            dim,
            d_prev: gain_prev.ncols(),
            d_upper: gain_upper.ncols(),
            gain_prev: row_major(gain_prev),
            gain_upper: row_major(gain_upper),
            offset: offset.iter().copied().collect(),
            chol: row_major(&l),
            log_norm: -log_det_half - 0.5 * dim as f64 * LN_2PI,
        })
    }

    /// Kernel without inputs.
    pub fn constant(dist: &GaussianDist) -> Result<Self> {
        let d = dist.dim();
        Self::new(&DMatrix::zeros(d, 0), &DMatrix::zeros(d, 0), &dist.mean, &dist.cov, "Gaussian covariance")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes the conditional mean into `out`.
    pub fn mean_into(&self, prev: &[f64], upper: &[f64], out: &mut [f64]) {
        let d = self.dim;
        debug_assert_eq!(prev.len(), self.d_prev);
        debug_assert_eq!(upper.len(), self.d_upper);
        for i in 0..d {
            let mut acc = self.offset[i];
            let row = &self.gain_prev[i * self.d_prev..(i + 1) * self.d_prev];
            for (a, x) in row.iter().zip(prev) {
                acc += a * x;
            }
            let row = &self.gain_upper[i * self.d_upper..(i + 1) * self.d_upper];
            for (a, x) in row.iter().zip(upper) {
                acc += a * x;
            }
            out[i] = acc;
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, prev: &[f64], upper: &[f64], rng: &mut R, out: &mut [f64]) {
        let d = self.dim;
        for o in out.iter_mut().take(d) {
            *o = rng.sample(StandardNormal);
        }
        // out ← L z in place, bottom row first.
        for i in (0..d).rev() {
            let row = &self.chol[i * d..i * d + i + 1];
            let mut acc = 0.0;
            for (l, z) in row.iter().zip(out.iter()) {
                acc += l * z;
            }
            out[i] = acc;
        }
        for i in 0..d {
            let mut acc = self.offset[i];
            let row = &self.gain_prev[i * self.d_prev..(i + 1) * self.d_prev];
            for (a, x) in row.iter().zip(prev) {
                acc += a * x;
            }
            let row = &self.gain_upper[i * self.d_upper..(i + 1) * self.d_upper];
            for (a, x) in row.iter().zip(upper) {
                acc += a * x;
            }
            out[i] += acc;
        }
    }

    pub fn log_density(&self, prev: &[f64], upper: &[f64], x: &[f64]) -> f64 {
        let d = self.dim;
        let mut stack = [0.0f64; 16];
        let mut heap;
        let resid: &mut [f64] = if d <= stack.len() {
            &mut stack[..d]
        } else {
            heap = vec![0.0; d];
            &mut heap
        };
        self.mean_into(prev, upper, resid);
        let mut quad = 0.0;
        for i in 0..d {
            let row = &self.chol[i * d..i * d + i];
            let mut acc = x[i] - resid[i];
            for (l, y) in row.iter().zip(resid.iter()) {
                acc -= l * y;
            }
            let y = acc / self.chol[i * d + i];
            resid[i] = y;
            quad += y * y;
        }
        self.log_norm - 0.5 * quad
    }
}
