//! Correlated random walk with a quadratic path-integral potential on the
//! location: velocity `dV = -β_v V dt + σ dB`, location `dL = (V - β_x L) dt`,
//! `𝒱 = L²/(2η²)`.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::chain_model::{ChainModel, PathIntegral, Rate};
use crate::error::{Error, Result};
use crate::lingauss::{centred, GaussianChain, GaussianTransition, LinearSde};

/// Below this relative gap between the two rates the generic closed forms
/// lose too many digits to cancellation, and the transition is taken from
/// the matrix exponential instead.
const NEAR_EQUAL_RATES: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtcrwpParams {
    pub beta_v: f64,
    pub beta_x: f64,
    pub sigma: f64,
    pub eta: f64,
    pub horizon: f64,
    pub step: f64,
}

impl CtcrwpParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.beta_v) || !positive(self.beta_x) {
            return Err(Error::InvalidArgument("rates must be positive"));
        }
        if !positive(self.sigma) || !positive(self.eta) || !positive(self.step) || !positive(self.horizon) {
            return Err(Error::InvalidArgument("σ, η, step and horizon must be positive"));
        }
        let cells = self.horizon / self.step;
        if libm::fabs(cells - libm::round(cells)) > 1e-9 * cells.max(1.0) {
            return Err(Error::InvalidArgument("horizon must be a multiple of the step"));
        }
        Ok(())
    }

    /// Number of grid points `τ/|Δ| + 1`.
    pub fn num_points(&self) -> usize {
        libm::round(self.horizon / self.step) as usize + 1
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.num_points()).map(|k| k as f64 * self.step).collect()
    }

    pub fn drift(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[-self.beta_v, 0.0, 1.0, -self.beta_x])
    }

    pub fn diffusion(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[self.sigma, 0.0, 0.0, 0.0])
    }

    pub fn sde(&self) -> Result<LinearSde> {
        LinearSde::new(self.drift(), self.diffusion(), centred(self.stationary_cov()))
    }

    /// Stationary covariance `S`.
    pub fn stationary_cov(&self) -> DMatrix<f64> {
        let (s11, s12, s22) = stationary_entries(self.beta_v, self.beta_x, self.sigma);
        DMatrix::from_row_slice(2, 2, &[s11, s12, s12, s22])
    }

    /// Closed-form transition over an interval of length `dt`.
    pub fn transition(&self, dt: f64) -> Result<GaussianTransition> {
        let (bv, bx, s2) = (self.beta_v, self.beta_x, self.sigma * self.sigma);
        let gap = bv - bx;
        if libm::fabs(gap) <= NEAR_EQUAL_RATES * bv.max(bx) && gap != 0.0 {
            return self.sde()?.transition(0.0, dt);
        }
        let ev = libm::exp(-bv * dt);
        let ex = libm::exp(-bx * dt);
        let one_minus = |rate: f64| -libm::expm1(-rate * dt);
        let q11 = s2 / (2.0 * bv) * one_minus(2.0 * bv);
        let (t21, q12, q22) = if gap == 0.0 {
            let e2 = libm::exp(-2.0 * bv * dt);
            let bt = bv * dt;
            (
                dt * ev,
                s2 / (4.0 * bv * bv) * (1.0 + e2 * (-2.0 * bt - 1.0)),
                s2 / (4.0 * bv * bv * bv) * (1.0 - e2 * (1.0 + 2.0 * bt * (bt + 1.0))),
            )
        } else {
            (
                (ex - ev) / gap,
                s2 / gap * (one_minus(bv + bx) / (bv + bx) - one_minus(2.0 * bv) / (2.0 * bv)),
                s2 / (gap * gap)
                    * (one_minus(2.0 * bx) / (2.0 * bx) + one_minus(2.0 * bv) / (2.0 * bv)
                        - 2.0 / (bx + bv) * one_minus(bx + bv)),
            )
        };
        Ok(GaussianTransition {
            matrix: DMatrix::from_row_slice(2, 2, &[ev, 0.0, t21, ex]),
            cov: DMatrix::from_row_slice(2, 2, &[q11, q12, q12, q22]),
        })
    }

    /// Proposal chain `M_0 = N(0, S)`, `M_k(·|x) = N(T x, Q)` on the regular grid.
    pub fn chain(&self) -> Result<GaussianChain> {
        self.validate()?;
        let step = self.transition(self.step)?;
        let transitions = alloc::vec![step; self.num_points() - 1];
        GaussianChain::from_transitions(centred(self.stationary_cov()), &transitions)
    }
}

/// `(s11, s12, s22)`; the limits of the transition covariance as `dt → ∞`,
/// written in a form without the `1/(β_v - β_x)` singularity.
pub fn stationary_entries(beta_v: f64, beta_x: f64, sigma: f64) -> (f64, f64, f64) {
    let s2 = sigma * sigma;
    let sum = beta_v + beta_x;
    (s2 / (2.0 * beta_v), s2 / (2.0 * beta_v * sum), s2 / (2.0 * beta_v * beta_x * sum))
}

/// The CTCRW-P Feynman–Kac model; potentials `log G_k = -|Δ| L_k²/(2η²)`
/// for `k < T-1` and `G_{T-1} ≡ 1`.
pub type CtcrwpModel = ChainModel<PathIntegral<QuadraticLocation>>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticLocation {
    pub eta: f64,
}

impl Rate for QuadraticLocation {
    fn rate(&self, x: &[f64]) -> f64 {
        x[1] * x[1] / (2.0 * self.eta * self.eta)
    }
}

pub fn ctcrwp_fk(params: &CtcrwpParams) -> Result<CtcrwpModel> {
    let chain = params.chain()?;
    let steps = alloc::vec![params.step; params.num_points() - 1];
    ChainModel::new(chain, PathIntegral { step_lengths: steps, rate: QuadraticLocation { eta: params.eta } })
}

/// Rates `(β_v, β_x)` for which the stationary covariance has unit
/// diagonal. `s11 = 1` pins `β_v = σ²/2`; `s22` is then strictly decreasing
/// in `β_x` and is solved by bisection.
pub fn ctcrwp_unit_stationary(sigma: f64) -> Result<(f64, f64)> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument("σ must be positive"));
    }
    let beta_v = sigma * sigma / 2.0;
    let residual = |bx: f64| stationary_entries(beta_v, bx, sigma).2 - 1.0;
    let (mut lo, mut hi) = (f64::MIN_POSITIVE, 1.0);
    while residual(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::NoRoot("no β_x with unit stationary location variance"));
        }
    }
    if !(residual(lo) > 0.0) {
        return Err(Error::NoRoot("no β_x with unit stationary location variance"));
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let beta_x = if libm::fabs(residual(lo)) < libm::fabs(residual(hi)) { lo } else { hi };
    if libm::fabs(residual(beta_x)) > 1e-10 {
        return Err(Error::NoRoot("bisection did not reach tolerance"));
    }
    Ok((beta_v, beta_x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(bv: f64, bx: f64, sigma: f64) -> CtcrwpParams {
        CtcrwpParams { beta_v: bv, beta_x: bx, sigma, eta: 1.0, horizon: 1.0, step: 1.0 }
    }

    #[test]
    fn equal_rates_transition_matrix() {
        let t = params(1.0, 1.0, 1.0).transition(1.0).unwrap();
        let e = libm::exp(-1.0);
        for (got, want) in t.matrix.iter().zip([e, e, 0.0, e]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_forms_match_matrix_exponential() {
        for &(bv, bx, s, dt) in
            &[(1.0, 0.3, 0.7, 0.5), (0.2, 2.0, 1.3, 0.03), (1.0, 1.0, 1.0, 1.0), (0.5, 0.5, 2.0, 3.0)]
        {
            let p = params(bv, bx, s);
            let closed = p.transition(dt).unwrap();
            let vl = p.sde().unwrap().transition(0.0, dt).unwrap();
            assert!((closed.matrix - vl.matrix).amax() < 1e-9);
            assert!((closed.cov - vl.cov).amax() < 1e-9);
        }
    }

    #[test]
    fn stationary_matches_explicit_form() {
        let (bv, bx, s) = (0.8, 0.35, 1.1);
        let (s11, s12, s22) = stationary_entries(bv, bx, s);
        let s2 = s * s;
        let d = bv - bx;
        assert!((s11 - s2 / (2.0 * bv)).abs() < 1e-14);
        assert!((s12 - s2 / d * (1.0 / (bv + bx) - 1.0 / (2.0 * bv))).abs() < 1e-13);
        assert!((s22 - s2 / (d * d) * (1.0 / (2.0 * bx) + 1.0 / (2.0 * bv) - 2.0 / (bx + bv))).abs() < 1e-12);
        let (_, e12, e22) = stationary_entries(0.6, 0.6, s);
        assert!((e12 - s2 / (4.0 * 0.36)).abs() < 1e-14);
        assert!((e22 - s2 / (4.0 * 0.216)).abs() < 1e-13);
    }

    #[test]
    fn unit_stationary_sqrt2() {
        let (bv, bx) = ctcrwp_unit_stationary(core::f64::consts::SQRT_2).unwrap();
        assert!((bv - 1.0).abs() < 1e-14);
        // β_x² + β_v β_x - σ²/(2β_v) = 0
        let want = (-1.0 + libm::sqrt(5.0)) / 2.0;
        assert!((bx - want).abs() < 1e-9);
    }

    #[test]
    fn unit_stationary_self_consistent() {
        for s in [0.125, 0.5, 1.0, 2.0] {
            let (bv, bx) = ctcrwp_unit_stationary(s).unwrap();
            let (s11, _, s22) = stationary_entries(bv, bx, s);
            assert!((s11 - 1.0).abs() < 1e-10 && (s22 - 1.0).abs() < 1e-10, "σ={s}");
        }
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = params(1.0, 1.0, 1.0);
        p.horizon = 1.5;
        p.step = 1.0;
        assert!(p.validate().is_err());
        assert!(ctcrwp_unit_stationary(0.0).is_err());
    }
}
