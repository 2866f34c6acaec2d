//! Normal laws pushed through repeated mirroring into an interval.

use crate::lingauss::LN_2PI;

pub const DEFAULT_K_TRUNC: usize = 10;

/// Mirrors `z` over the boundaries of `(a, b)` until it lands inside.
///
/// Mirroring is periodic with period `2(b-a)`, so this folds in one step.
/// A value landing exactly on a boundary is returned as is; mirroring it
/// again would map it to itself.
pub fn reflect(z: f64, a: f64, b: f64) -> f64 {
    debug_assert!(a < b);
    if z > a && z < b {
        return z;
    }
    let width = b - a;
    let period = 2.0 * width;
    let mut y = libm::fmod(z - a, period);
    if y < 0.0 {
        y += period;
    }
    let folded = if y > width { 2.0 * width - y } else { y };
    (a + folded).clamp(a, b)
}

fn log_normal(x: f64, mu: f64, var: f64) -> f64 {
    let r = x - mu;
    -0.5 * (r * r / var + libm::log(var) + LN_2PI)
}

/// The `k`-th image points `(g_a^{(k)}(x), g_b^{(k)}(x))` that reflect onto `x`.
pub fn reflection_images(x: f64, k: usize, a: f64, b: f64) -> (f64, f64) {
    let kf = k as f64;
    let (sign, odd) = if k % 2 == 1 { (-1.0, a + b) } else { (1.0, 0.0) };
    (sign * x + kf * a - kf * b + odd, sign * x + kf * b - kf * a + odd)
}

/// Log-density of the reflected normal `N^r(μ, σ², a, b)` at `x`, with the
/// image sum truncated after `k_trunc` pairs; `-∞` outside `(a, b)`.
pub fn reflected_normal_logpdf(x: f64, mu: f64, var: f64, a: f64, b: f64, k_trunc: usize) -> f64 {
    if !(x > a && x < b) {
        return f64::NEG_INFINITY;
    }
    let base = log_normal(x, mu, var);
    let mut max = base;
    let mut terms = [0.0f64; 2];
    // Two passes keep this allocation-free: first the maximum, then the sum.
    for k in 1..=k_trunc {
        let (ga, gb) = reflection_images(x, k, a, b);
        terms[0] = log_normal(ga, mu, var);
        terms[1] = log_normal(gb, mu, var);
        max = max.max(terms[0]).max(terms[1]);
    }
    let mut sum = libm::exp(base - max);
    for k in 1..=k_trunc {
        let (ga, gb) = reflection_images(x, k, a, b);
        sum += libm::exp(log_normal(ga, mu, var) - max) + libm::exp(log_normal(gb, mu, var) - max);
    }
    max + libm::log(sum)
}
