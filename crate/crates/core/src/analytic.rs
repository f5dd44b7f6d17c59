//! Closed forms: the sharp sphere constant, bubbles, the bubble image under
//! the Riesz potential, and the semi-analytic truncation and mass-gap terms.
//!
//! The double integrals over balls and their complements are reduced to
//! radial integrals with the angular mean of |x − y|^β (closed form for
//! n = 1 and n = 3, numeric otherwise) and evaluated by tanh–sinh
//! quadrature. All of them are independent of the kernel matrices, so they
//! serve as references for the discrete computations.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::math::{critical_exponent, gamma, sphere_area};
use crate::quadrature::{integrate, integrate_split, integrate_to_infinity};
use crate::{Error, Result};

const TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpConstant {
    pub n: usize,
    pub alpha: f64,
    pub value: f64,
}

fn check_alpha(n: usize, alpha: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::UnsupportedDimension {
            dim: 0,
            what: "sharp constant",
        });
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: "must be positive".into(),
        });
    }
    if alpha == n as f64 {
        return Err(Error::AlphaEqualsDimension { dim: n });
    }
    Ok(())
}

/// Y_α(S^n) = π^{(n−α)/2} Γ(α/2)/Γ((n+α)/2) · (Γ(n/2)/Γ(n))^{−α/n}.
pub fn sharp_constant_sphere(n: usize, alpha: f64) -> Result<SharpConstant> {
    check_alpha(n, alpha)?;
    let nf = n as f64;
    let value = PI.powf((nf - alpha) / 2.0) * gamma(alpha / 2.0) / gamma((nf + alpha) / 2.0)
        * (gamma(nf / 2.0) / gamma(nf)).powf(-alpha / nf);
    Ok(SharpConstant { n, alpha, value })
}

/// B = π^{n/2} Γ(α/2)/Γ((n+α)/2).
pub fn funk_hecke_constant(n: usize, alpha: f64) -> Result<f64> {
    check_alpha(n, alpha)?;
    let nf = n as f64;
    Ok(PI.powf(nf / 2.0) * gamma(alpha / 2.0) / gamma((nf + alpha) / 2.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleParams {
    pub epsilon: f64,
    pub center: Vec<f64>,
    pub alpha: f64,
}

impl BubbleParams {
    pub fn new(epsilon: f64, center: Vec<f64>, alpha: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "epsilon",
                reason: "must be positive".into(),
            });
        }
        if center.is_empty() {
            return Err(Error::UnsupportedDimension {
                dim: 0,
                what: "bubble",
            });
        }
        Ok(BubbleParams {
            epsilon,
            center,
            alpha,
        })
    }

    /// Bubble of scale λ centred at the origin of R^n.
    pub fn centered(n: usize, lambda: f64, alpha: f64) -> Result<Self> {
        Self::new(lambda, alloc::vec![0.0; n], alpha)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    fn exponent(&self) -> f64 {
        (self.dim() as f64 + self.alpha) / 2.0
    }
}

/// (ε/(ε² + |x − x_0|²))^{(n+α)/2}.
pub fn bubble_eval(b: &BubbleParams, x: &[f64]) -> f64 {
    let r2: f64 = x
        .iter()
        .zip(&b.center)
        .map(|(a, c)| (a - c) * (a - c))
        .sum();
    (b.epsilon / (b.epsilon * b.epsilon + r2)).powf(b.exponent())
}

/// B · f_λ(y)^{(n−α)/(n+α)}, the Riesz potential of the bubble on R^n.
pub fn funk_hecke_image(b: &BubbleParams, y: &[f64]) -> Result<f64> {
    let n = b.dim();
    let big_b = funk_hecke_constant(n, b.alpha)?;
    let nf = n as f64;
    Ok(big_b * bubble_eval(b, y).powf((nf - b.alpha) / (nf + b.alpha)))
}

/// Average of |r θ − ρ e|^β over unit directions θ ∈ S^{n−1}.
pub fn angular_mean_power(n: usize, r: f64, rho: f64, beta: f64) -> f64 {
    let (big, small) = if r >= rho { (r, rho) } else { (rho, r) };
    if small == 0.0 {
        return big.powf(beta);
    }
    match n {
        1 => 0.5 * ((big - small).powf(beta) + (big + small).powf(beta)),
        3 => {
            let s = small / big;
            if s < 1e-5 {
                return big.powf(beta) * (1.0 + s * s * beta * (beta + 1.0) / 6.0);
            }
            // [(r+ρ)^{β+2} − |r−ρ|^{β+2}] / (2rρ(β+2)) in units of the larger radius
            let b2 = beta + 2.0;
            let shape = if b2.abs() < 1e-12 {
                ((1.0 + s) / (1.0 - s)).ln() / (2.0 * s)
            } else {
                ((1.0 + s).powf(b2) - (1.0 - s).powf(b2)) / (2.0 * s * b2)
            };
            big.powf(beta) * shape
        }
        _ => {
            let c = sphere_area(n - 2) / sphere_area(n - 1);
            let bb = 2.0 * r * rho;
            let k = n as i32 - 2;
            let g = |phi: f64| {
                // 1 − cos φ written as 2 sin²(φ/2) to keep small angles exact
                let h = (0.5 * phi).sin();
                let d2 = (big - small) * (big - small) + 2.0 * bb * h * h;
                d2.powf(beta / 2.0) * phi.sin().powi(k)
            };
            c * integrate(g, 0.0, PI, TOL).value
        }
    }
}

/// Integrates over [lo, hi] (hi may be +∞), splitting at `split` if it lies
/// inside; the infinite tail is mapped with the scale of its left end.
fn radial<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, split: Option<f64>, tol: f64) -> f64 {
    let gap = 1e-12
        * lo.abs()
            .max(if hi.is_finite() { hi.abs() } else { 1.0 })
            .max(1.0);
    let splits: Vec<f64> = split
        .into_iter()
        .filter(|s| *s > lo + gap && *s < hi - gap)
        .collect();
    if hi.is_finite() {
        return integrate_split(&f, lo, hi, &splits, tol).value;
    }
    let cut = splits.first().copied().unwrap_or(lo);
    let head = if cut > lo {
        integrate(&f, lo, cut, tol).value
    } else {
        0.0
    };
    let scale = if cut > 0.0 { cut } else { 1.0 };
    let tail = integrate_to_infinity(|u| f(cut + scale * u) * scale, 0.0, tol).value;
    head + tail
}

fn profile(n: usize, alpha: f64) -> impl Fn(f64) -> f64 {
    let e = -(n as f64 + alpha) / 2.0;
    move |t: f64| (1.0 + t * t).powf(e)
}

/// ∫∫ F(|u|)F(|v|)|u − v|^β du dv over |u| ∈ [a0, a1], |v| ∈ [b0, b1] for the
/// unit bubble profile F(t) = (1 + t²)^{−(n+α)/2}.
fn bubble_pair_integral(n: usize, alpha: f64, beta: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    let f = profile(n, alpha);
    let s = sphere_area(n - 1);
    let m = (n - 1) as i32;
    let outer = |rho: f64| {
        let inner = radial(
            |r| f(r) * r.powi(m) * angular_mean_power(n, r, rho, beta),
            a.0,
            a.1,
            Some(rho),
            1e-11,
        );
        f(rho) * rho.powi(m) * inner
    };
    s * s * radial(outer, b.0, b.1, None, 1e-10)
}

/// ∫_{R^n \ B_δ} f_λ(x)|x − y|^{α−n} dx for a centred bubble and |y| = ρ < δ.
pub fn exterior_tail(n: usize, alpha: f64, lambda: f64, delta: f64, rho: f64) -> Result<f64> {
    check_alpha(n, alpha)?;
    if !(lambda > 0.0 && delta > 0.0 && rho >= 0.0 && rho <= delta) {
        return Err(Error::InvalidParameter {
            name: "rho",
            reason: "need λ, δ > 0 and 0 ≤ ρ ≤ δ".into(),
        });
    }
    let f = profile(n, alpha);
    let beta = alpha - n as f64;
    let m = (n - 1) as i32;
    let t = delta / lambda;
    let q = rho / lambda;
    let v = radial(
        |r| f(r) * r.powi(m) * angular_mean_power(n, r, q, beta),
        t,
        f64::INFINITY,
        None,
        TOL,
    );
    Ok(lambda.powf(beta / 2.0) * sphere_area(n - 1) * v)
}

/// ∫_{|x| ∈ [a, b]} f_λ^{2n/(n+α)} dx in units of the scaled radius t = |x|/λ.
fn pmass(n: usize, a: f64, b: f64) -> f64 {
    let m = (n - 1) as i32;
    let e = -(n as f64);
    sphere_area(n - 1) * radial(|t| (1.0 + t * t).powf(e) * t.powi(m), a, b, None, TOL)
}

/// Total p-mass ∫_{R^n} f_λ^{2n/(n+α)} = π^{n/2} Γ(n/2)/Γ(n), independent of λ and α.
pub fn bubble_pmass(n: usize) -> f64 {
    let nf = n as f64;
    PI.powf(nf / 2.0) * gamma(nf / 2.0) / gamma(nf)
}

/// Error terms of the truncated bubble f_λ·1_{B_δ}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationTerms {
    /// α < n: 2∫∫_{R^n×(R^n\B_δ)}; α > n: ∫∫_{R^n×(R^n\B_δ)}.
    pub one: f64,
    /// α < n: ∫∫ over (R^n\B_δ)²; α > n: ∫∫ over B_δ×(R^n\B_δ).
    pub two: f64,
    /// ∫∫_{B_δ×B_δ} f_λ f_λ |x−y|^{α−n}.
    pub inner_energy: f64,
    /// ‖f_λ‖²_{L^p(B_δ)} at p = 2n/(n+α).
    pub inner_norm_sq: f64,
}

fn check_ratio(delta: f64, lambda: f64) -> Result<f64> {
    if !(delta > 0.0 && lambda > 0.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: "δ and λ must be positive".into(),
        });
    }
    let t = delta / lambda;
    if !(t > 1.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: "need δ/λ > 1".into(),
        });
    }
    Ok(t)
}

/// Terms depend only on δ/λ; term one uses the Funk–Hecke identity, term
/// two and the inner energy are evaluated directly.
pub fn truncation_terms(n: usize, alpha: f64, delta: f64, lambda: f64) -> Result<TruncationTerms> {
    check_alpha(n, alpha)?;
    let t = check_ratio(delta, lambda)?;
    let big_b = funk_hecke_constant(n, alpha)?;
    let nf = n as f64;
    let beta = alpha - nf;
    let outside = pmass(n, t, f64::INFINITY);
    let total = bubble_pmass(n);
    let inside = total - outside;
    let p = critical_exponent(n, alpha);
    let inf = f64::INFINITY;
    let (one, two, inner_energy) = if alpha < nf {
        let one = 2.0 * big_b * outside;
        let two = bubble_pair_integral(n, alpha, beta, (t, inf), (t, inf));
        (one, two, big_b * total - one + two)
    } else {
        let one = big_b * outside;
        let two = bubble_pair_integral(n, alpha, beta, (t, inf), (0.0, t));
        (one, two, big_b * total - one - two)
    };
    Ok(TruncationTerms {
        one,
        two,
        inner_energy,
        inner_norm_sq: inside.powf(2.0 / p),
    })
}

/// J of the truncated bubble on R^n at the critical exponent.
pub fn truncated_quotient(n: usize, alpha: f64, delta: f64, lambda: f64) -> Result<f64> {
    let tt = truncation_terms(n, alpha, delta, lambda)?;
    Ok(tt.inner_energy / tt.inner_norm_sq)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationBound {
    pub lower: f64,
    pub upper: f64,
    pub constant: f64,
    /// Power of δ/λ in the correction, −n.
    pub exponent: f64,
}

/// Smallest C with |J(f_λ 1_{B_δ}) − Y| ≤ C (δ/λ)^{−n} over the given ratios.
pub fn fit_truncation_constant(n: usize, alpha: f64, ratios: &[f64]) -> Result<f64> {
    let y = sharp_constant_sphere(n, alpha)?.value;
    let mut c: f64 = 0.0;
    for &t in ratios {
        let j = truncated_quotient(n, alpha, t, 1.0)?;
        c = c.max((j - y).abs() * t.powi(n as i32));
    }
    Ok(c)
}

/// Y ∓ C (δ/λ)^{−n}.
pub fn truncation_error_bound(
    n: usize,
    alpha: f64,
    delta: f64,
    lambda: f64,
    constant: f64,
) -> Result<TruncationBound> {
    let t = check_ratio(delta, lambda)?;
    let y = sharp_constant_sphere(n, alpha)?.value;
    let e = -(n as f64);
    let corr = constant * t.powf(e);
    Ok(TruncationBound {
        lower: y - corr,
        upper: y + corr,
        constant,
        exponent: e,
    })
}

/// ∫∫_{B_δ×B_δ} |x − y|^{α−2} f_λ(x) f_λ(y) dx dy = λ^{n−2} G(δ/λ).
pub fn a_term_integral(n: usize, alpha: f64, delta: f64, lambda: f64) -> Result<f64> {
    check_alpha(n, alpha)?;
    let t = check_ratio(delta, lambda)?;
    let g = bubble_pair_integral(n, alpha, alpha - 2.0, (0.0, t), (0.0, t));
    Ok(lambda.powf(n as f64 - 2.0) * g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapConstants {
    /// min A-term / λ^{n−2}.
    pub c1: f64,
    /// min |e| A-term / (λ^{n−2} ‖u‖_p²), e = (α−n)/(2−n) the first-order
    /// coefficient of the Green power in A.
    pub c2: f64,
    /// Truncation constant from [`fit_truncation_constant`].
    pub c: f64,
}

/// Fits the gap constants on a list of λ at fixed δ.
pub fn fit_gap_constants(
    n: usize,
    alpha: f64,
    delta: f64,
    lambdas: &[f64],
) -> Result<GapConstants> {
    if n < 3 {
        return Err(Error::UnsupportedDimension {
            dim: n,
            what: "mass gap (needs n >= 3)",
        });
    }
    if lambdas.is_empty() {
        return Err(Error::InvalidParameter {
            name: "lambdas",
            reason: "empty".into(),
        });
    }
    let nf = n as f64;
    let e = ((alpha - nf) / (2.0 - nf)).abs();
    let mut c1 = f64::INFINITY;
    let mut c2 = f64::INFINITY;
    let mut ratios = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let a = a_term_integral(n, alpha, delta, l)? / l.powf(nf - 2.0);
        let tt = truncation_terms(n, alpha, delta, l)?;
        c1 = c1.min(a);
        c2 = c2.min(e * a / tt.inner_norm_sq);
        ratios.push(delta / l);
    }
    let c = fit_truncation_constant(n, alpha, &ratios)?;
    Ok(GapConstants { c1, c2, c })
}

/// λ^{n−2}(C₂A − C λ² δ^{−n}).
pub fn mass_gap_bound(
    n: usize,
    alpha: f64,
    mass: f64,
    delta: f64,
    lambda: f64,
    k: &GapConstants,
) -> Result<f64> {
    check_alpha(n, alpha)?;
    if n < 3 {
        return Err(Error::UnsupportedDimension {
            dim: n,
            what: "mass gap (needs n >= 3)",
        });
    }
    if !(mass >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "mass",
            reason: "must be nonnegative".into(),
        });
    }
    check_ratio(delta, lambda)?;
    let nf = n as f64;
    Ok(lambda.powf(nf - 2.0) * (k.c2 * mass - k.c * lambda * lambda * delta.powf(-nf)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sharp_constant_from_funk_hecke() {
        // extremality of the bubble on R^n: Y = B (∫ f^p)^{−α/n}
        for (n, a) in [(1, 0.5), (1, 2.0), (2, 1.0), (3, 1.0), (3, 4.0), (3, 2.0)] {
            let y = sharp_constant_sphere(n, a).unwrap().value;
            let b = funk_hecke_constant(n, a).unwrap();
            let via = b * bubble_pmass(n).powf(-a / n as f64);
            assert_relative_eq!(y, via, max_relative = 1e-13);
        }
    }

    #[test]
    fn known_values() {
        assert_relative_eq!(
            sharp_constant_sphere(2, 1.0).unwrap().value,
            2.0 * PI.sqrt(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            sharp_constant_sphere(1, 2.0).unwrap().value,
            2.0 / (PI * PI),
            max_relative = 1e-14
        );
        assert!(matches!(
            sharp_constant_sphere(3, 3.0),
            Err(Error::AlphaEqualsDimension { dim: 3 })
        ));
    }

    #[test]
    fn bubble_scaling_identity() {
        let b1 = BubbleParams::centered(2, 1.0, 1.0).unwrap();
        let eps = 0.37;
        let x0 = [0.4, -1.1];
        let be = BubbleParams::new(eps, x0.to_vec(), 1.0).unwrap();
        assert_eq!(bubble_eval(&b1, &[0.0, 0.0]), 1.0);
        for x in [[0.0, 0.0], [1.0, 2.0], [-3.0, 0.5]] {
            let u = [(x[0] - x0[0]) / eps, (x[1] - x0[1]) / eps];
            let expect = eps.powf(-1.5) * bubble_eval(&b1, &u);
            assert_relative_eq!(bubble_eval(&be, &x), expect, max_relative = 1e-13);
        }
    }

    #[test]
    fn funk_hecke_image_limits() {
        let b = BubbleParams::centered(3, 1.0, 1.0).unwrap();
        let big_b = funk_hecke_constant(3, 1.0).unwrap();
        assert_relative_eq!(
            funk_hecke_image(&b, &[0.0; 3]).unwrap(),
            big_b,
            max_relative = 1e-15
        );
        let y = 1e4;
        let far = funk_hecke_image(&b, &[y, 0.0, 0.0]).unwrap();
        assert_relative_eq!(far, big_b * y.powf(-2.0), max_relative = 1e-7);
    }

    #[test]
    fn angular_means() {
        // n = 3 at r = 2, ρ = 1, β = 1: (3³ − 1³)/(2·2·1·3)
        assert_relative_eq!(
            angular_mean_power(3, 2.0, 1.0, 1.0),
            (27.0 - 1.0) / 12.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            angular_mean_power(3, 2.0, 1.0, -1.0),
            0.5,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            angular_mean_power(3, 2.0, 1.0, 2.0),
            5.0,
            max_relative = 1e-14
        );
        // numeric branch against the closed form
        let generic = {
            let c = sphere_area(1) / sphere_area(2);
            c * integrate(
                |p: f64| (5.0 - 4.0 * p.cos()).powf(0.35) * p.sin(),
                0.0,
                PI,
                1e-14,
            )
            .value
        };
        assert_relative_eq!(
            angular_mean_power(3, 2.0, 1.0, 0.7),
            generic,
            max_relative = 1e-12
        );
        // n = 2, β = 2: mean of r² + ρ² − 2rρ cos φ
        assert_relative_eq!(
            angular_mean_power(2, 2.0, 1.0, 2.0),
            5.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn exterior_tail_matches_direct_integral_n1() {
        // n = 1: ∫_{|x|>δ} (λ/(λ²+x²))^{3/4} |x−y|^{−1/2} dx by direct quadrature
        let (alpha, lambda, delta, y) = (0.5, 0.7, 3.0, 1.2);
        let f = |x: f64| (lambda / (lambda * lambda + x * x)).powf(0.75);
        let right =
            integrate_to_infinity(|u| f(delta + u) * (delta + u - y).powf(-0.5), 0.0, 1e-13).value;
        let left =
            integrate_to_infinity(|u| f(-delta - u) * (delta + u + y).powf(-0.5), 0.0, 1e-13).value;
        let t = exterior_tail(1, alpha, lambda, delta, y).unwrap();
        assert_relative_eq!(t, left + right, max_relative = 1e-9);
    }

    #[test]
    fn truncated_quotient_approaches_constant() {
        let y = sharp_constant_sphere(1, 0.5).unwrap().value;
        let j8 = truncated_quotient(1, 0.5, 8.0, 1.0).unwrap();
        let j32 = truncated_quotient(1, 0.5, 32.0, 1.0).unwrap();
        assert!(j8 < y && j32 < y && j32 > j8);
        let yr = sharp_constant_sphere(1, 2.0).unwrap().value;
        let r8 = truncated_quotient(1, 2.0, 8.0, 1.0).unwrap();
        assert!(r8 > yr);
    }

    #[test]
    fn a_term_closed_form_alpha_four() {
        // n = 3, α = 4: angular mean is r² + ρ², so the A-term factorizes
        let (delta, lambda) = (1.0, 0.25);
        let t: f64 = delta / lambda;
        let f = profile(3, 4.0);
        let s = sphere_area(2);
        let m0 = s * integrate(|r| f(r) * r * r, 0.0, t, 1e-14).value;
        let m2 = s * integrate(|r| f(r) * r.powi(4), 0.0, t, 1e-14).value;
        let expect = lambda * 2.0 * m0 * m2;
        assert_relative_eq!(
            a_term_integral(3, 4.0, delta, lambda).unwrap(),
            expect,
            max_relative = 1e-9
        );
    }

    #[test]
    fn gap_bound_with_zero_mass_is_negative() {
        let k = GapConstants {
            c1: 1.0,
            c2: 2.0,
            c: 3.0,
        };
        let v = mass_gap_bound(3, 1.0, 0.0, 1.0, 0.1, &k).unwrap();
        assert_relative_eq!(v, -3.0 * 0.1f64.powi(3), max_relative = 1e-14);
        assert!(mass_gap_bound(3, 1.0, 1.0, 1.0, 0.1, &k).unwrap() > 0.0);
    }
}
