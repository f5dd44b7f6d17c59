//! Special functions and small numeric helpers shared by the other modules.

use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

/// Gamma function. Backed by the musl-derived `libm::tgamma`.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Natural log of |Γ(x)|.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Volume ω_n of the unit ball in R^n.
pub fn unit_ball_volume(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    PI.powf(h) / gamma(h + 1.0)
}

/// Surface measure of the unit sphere S^n ⊂ R^{n+1}; `sphere_area(0) = 2`.
pub fn sphere_area(n: usize) -> f64 {
    let h = (n as f64 + 1.0) / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Critical exponent 2n/(n+α) of the energy quotient.
pub fn critical_exponent(n: usize, alpha: f64) -> f64 {
    2.0 * n as f64 / (n as f64 + alpha)
}

/// Target exponent q of the HLS pair, 1/q = 1/p − α/n. Returns `None` when
/// 1/q vanishes.
pub fn hls_target_exponent(n: usize, alpha: f64, p: f64) -> Option<f64> {
    let inv = 1.0 / p - alpha / n as f64;
    if inv == 0.0 {
        None
    } else {
        Some(1.0 / inv)
    }
}

/// Weighted power sum Σ w_i |f_i|^p.
pub(crate) fn weighted_power_sum(weights: &[f64], values: &[f64], p: f64) -> f64 {
    weights
        .iter()
        .zip(values)
        .map(|(w, v)| w * v.abs().powf(p))
        .sum()
}

/// (Σ w_i |f_i|^q)^{1/q}; for q < 0 every entry must be positive.
pub fn weighted_lq(weights: &[f64], values: &[f64], q: f64) -> f64 {
    weighted_power_sum(weights, values, q).powf(1.0 / q)
}

pub(crate) fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}
