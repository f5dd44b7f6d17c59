//! The energy quotient J(f) = ⟨f, K f⟩_w / ‖f‖_p² and its first variation.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::geometry::{ManifoldId, QuadratureManifold};
use crate::kernel::KernelMatrix;
use crate::math::{critical_exponent, weighted_power_sum};
use crate::{Error, Result};

/// Nonnegative nodal function tied to the manifold it was sampled on.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    values: Vec<f64>,
    manifold_id: ManifoldId,
}

impl Density {
    pub fn new(m: &QuadratureManifold, values: Vec<f64>) -> Result<Self> {
        if values.len() != m.node_count() {
            return Err(Error::DimensionMismatch {
                expected: m.node_count(),
                found: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidDensity { index });
        }
        Ok(Density {
            values,
            manifold_id: m.id(),
        })
    }

    pub fn constant(m: &QuadratureManifold, c: f64) -> Result<Self> {
        Self::new(m, alloc::vec![c; m.node_count()])
    }

    pub fn indicator(m: &QuadratureManifold, node: usize) -> Result<Self> {
        if node >= m.node_count() {
            return Err(Error::InvalidParameter {
                name: "node",
                reason: format!("index {node} out of range"),
            });
        }
        let mut v = alloc::vec![0.0; m.node_count()];
        v[node] = 1.0;
        Self::new(m, v)
    }

    /// Samples `f` at the node coordinates.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(m: &QuadratureManifold, f: F) -> Result<Self> {
        let values = (0..m.node_count()).map(|i| f(m.node(i))).collect();
        Self::new(m, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn manifold_id(&self) -> ManifoldId {
        self.manifold_id
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_manifold(&self, m: &QuadratureManifold) -> Result<()> {
        if self.manifold_id != m.id() || self.values.len() != m.node_count() {
            return Err(Error::ManifoldMismatch);
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "c",
                reason: "must be nonnegative".into(),
            });
        }
        Ok(Density {
            values: self.values.iter().map(|v| v * c).collect(),
            manifold_id: self.manifold_id,
        })
    }

    /// Rescales to ‖f‖_p = 1.
    pub fn normalized(&self, m: &QuadratureManifold, p: f64) -> Result<Self> {
        let l = lp_functional(self, m, p)?;
        if l == 0.0 {
            return Err(Error::ZeroDensity);
        }
        self.scaled(1.0 / l)
    }

    /// Internal constructor for iterates known to be valid.
    pub(crate) fn from_raw(values: Vec<f64>, manifold_id: ManifoldId) -> Self {
        Density {
            values,
            manifold_id,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// α < n: supremum of J over nonnegative f.
    Maximize,
    /// α > n: infimum of J over nonnegative f.
    Minimize,
}

impl Regime {
    pub fn for_alpha(dim: usize, alpha: f64) -> Result<Self> {
        let n = dim as f64;
        if alpha == n {
            Err(Error::AlphaEqualsDimension { dim })
        } else if alpha < n {
            Ok(Regime::Maximize)
        } else {
            Ok(Regime::Minimize)
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Maximize => "maximize",
            Regime::Minimize => "minimize",
        }
    }
}

/// A kernel together with the exponent and optimization direction.
#[derive(Debug, Clone, Copy)]
pub struct QuotientSetup<'a> {
    kernel: &'a KernelMatrix,
    p: f64,
    regime: Regime,
}

impl<'a> QuotientSetup<'a> {
    /// Valid exponents: p ∈ [2n/(n+α), ∞) with p > 1 when maximizing,
    /// p ∈ (0, 2n/(n+α)] when minimizing.
    pub fn new(kernel: &'a KernelMatrix, p: f64, regime: Regime) -> Result<Self> {
        let n = kernel.dim();
        let alpha = kernel.alpha();
        let expected = Regime::for_alpha(n, alpha)?;
        if expected != regime {
            return Err(Error::RegimeMismatch(format!(
                "alpha = {alpha} with n = {n} requires {}, got {}",
                expected.as_str(),
                regime.as_str()
            )));
        }
        let pc = critical_exponent(n, alpha);
        let tol = 1e-12 * pc;
        let ok = match regime {
            Regime::Maximize => p > 1.0 && p >= pc - tol && p.is_finite(),
            Regime::Minimize => p > 0.0 && p <= pc + tol,
        };
        if !ok {
            return Err(Error::ExponentRelation(format!(
                "p = {p} outside the {} range (critical exponent {pc})",
                regime.as_str()
            )));
        }
        Ok(QuotientSetup { kernel, p, regime })
    }

    /// Setup at the critical exponent 2n/(n+α) with the regime implied by α.
    pub fn critical(kernel: &'a KernelMatrix) -> Result<Self> {
        let regime = Regime::for_alpha(kernel.dim(), kernel.alpha())?;
        Self::new(
            kernel,
            critical_exponent(kernel.dim(), kernel.alpha()),
            regime,
        )
    }

    pub fn kernel(&self) -> &'a KernelMatrix {
        self.kernel
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// Same kernel and regime at another exponent.
    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(self.kernel, p, self.regime)
    }
}

/// (Σ w_i f_i^p)^{1/p}. For p < 1 this is the same formula, not a norm.
pub fn lp_functional(f: &Density, m: &QuadratureManifold, p: f64) -> Result<f64> {
    f.check_manifold(m)?;
    if !(p > 0.0) {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: "must be positive".into(),
        });
    }
    Ok(weighted_power_sum(m.weights(), f.values(), p).powf(1.0 / p))
}

/// Σ_i Σ_j w_i w_j f_i K_ij g_j.
pub fn bilinear(k: &KernelMatrix, m: &QuadratureManifold, f: &Density, g: &Density) -> Result<f64> {
    k.check_manifold(m)?;
    f.check_manifold(m)?;
    g.check_manifold(m)?;
    Ok(bilinear_raw(k, m.weights(), f.values(), g.values()))
}

pub(crate) fn bilinear_raw(k: &KernelMatrix, w: &[f64], f: &[f64], g: &[f64]) -> f64 {
    let kg = k.apply_weighted(w, g);
    w.iter()
        .zip(f)
        .zip(&kg)
        .map(|((w, f), kg)| w * f * kg)
        .sum()
}

/// Column-major contraction Σ_j w_j g_j Σ_i K_ij w_i f_i, the transpose
/// order of [`bilinear`].
pub fn bilinear_transposed(
    k: &KernelMatrix,
    m: &QuadratureManifold,
    f: &Density,
    g: &Density,
) -> Result<f64> {
    k.check_manifold(m)?;
    f.check_manifold(m)?;
    g.check_manifold(m)?;
    let w = m.weights();
    let n = k.size();
    let mut col = alloc::vec![0.0; n];
    for i in 0..n {
        let a = w[i] * f.values()[i];
        for (c, kij) in col.iter_mut().zip(k.row(i)) {
            *c += kij * a;
        }
    }
    Ok(col
        .iter()
        .zip(w)
        .zip(g.values())
        .map(|((c, w), g)| c * w * g)
        .sum())
}

/// J(f) = bilinear(f, f) / ‖f‖_p².
pub fn quotient(s: &QuotientSetup<'_>, m: &QuadratureManifold, f: &Density) -> Result<f64> {
    s.kernel.check_manifold(m)?;
    f.check_manifold(m)?;
    quotient_raw(s.kernel, m.weights(), f.values(), s.p)
}

/// Quotient on raw values; sign changes are allowed (|f|^p in the
/// denominator).
pub fn quotient_raw(k: &KernelMatrix, w: &[f64], f: &[f64], p: f64) -> Result<f64> {
    let denom = weighted_power_sum(w, f, p);
    if denom == 0.0 {
        return Err(Error::ZeroDensity);
    }
    Ok(bilinear_raw(k, w, f, f) / denom.powf(2.0 / p))
}

/// ∇_i J = [2 w_i (K_w f)_i − 2 J ‖f‖_p^{2−p} w_i f_i^{p−1}] / ‖f‖_p².
pub fn gradient(s: &QuotientSetup<'_>, m: &QuadratureManifold, f: &Density) -> Result<Vec<f64>> {
    s.kernel.check_manifold(m)?;
    f.check_manifold(m)?;
    if s.p < 1.0 {
        if let Some(index) = f.values().iter().position(|v| *v <= 0.0) {
            return Err(Error::NonPositiveDensity { index, p: s.p });
        }
    }
    let (grad, _) = gradient_raw(s.kernel, m.weights(), f.values(), s.p)?;
    Ok(grad)
}

/// Gradient together with J(f).
pub(crate) fn gradient_raw(
    k: &KernelMatrix,
    w: &[f64],
    f: &[f64],
    p: f64,
) -> Result<(Vec<f64>, f64)> {
    let kf = k.apply_weighted(w, f);
    let energy: f64 = w
        .iter()
        .zip(f)
        .zip(&kf)
        .map(|((w, f), kf)| w * f * kf)
        .sum();
    let s = weighted_power_sum(w, f, p);
    if s == 0.0 {
        return Err(Error::ZeroDensity);
    }
    let l = s.powf(1.0 / p);
    let l2 = l * l;
    let j = energy / l2;
    let c = 2.0 * j * l.powf(2.0 - p);
    let grad = w
        .iter()
        .zip(f)
        .zip(&kf)
        .map(|((w, f), kf)| {
            let fp = if *f == 0.0 && p > 1.0 {
                0.0
            } else {
                f.powf(p - 1.0)
            };
            (2.0 * w * kf - c * w * fp) / l2
        })
        .collect();
    Ok((grad, j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_flat_torus, build_sphere, DistanceMode};
    use crate::kernel::{assemble, KernelSpec};
    use approx::assert_relative_eq;

    fn two_node() -> (QuadratureManifold, KernelMatrix) {
        let m = QuadratureManifold::abstract_system(
            1,
            alloc::vec![1.0, 1.0],
            alloc::vec![0.0, 1.0, 1.0, 0.0],
        )
        .unwrap();
        let k = KernelMatrix::custom(&m, 0.5, alloc::vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        (m, k)
    }

    #[test]
    fn hand_computed_bilinear() {
        let (m, k) = two_node();
        let f = Density::constant(&m, 1.0).unwrap();
        assert_eq!(bilinear(&k, &m, &f, &f).unwrap(), 2.0);
        let z = Density::constant(&m, 0.0).unwrap();
        assert_eq!(bilinear(&k, &m, &f, &z).unwrap(), 0.0);
    }

    #[test]
    fn lp_of_constant() {
        let m = build_sphere(2, 200, DistanceMode::Chordal).unwrap();
        let f = Density::constant(&m, 1.0).unwrap();
        let p = 4.0 / 3.0;
        assert_relative_eq!(
            lp_functional(&f, &m, p).unwrap(),
            (4.0 * core::f64::consts::PI).powf(1.0 / p),
            max_relative = 1e-12
        );
    }

    #[test]
    fn regime_validation() {
        let m = build_sphere(1, 40, DistanceMode::Chordal).unwrap();
        let k = assemble(&m, KernelSpec::riesz(0.5)).unwrap();
        assert!(matches!(
            QuotientSetup::new(&k, 1.5, Regime::Minimize),
            Err(Error::RegimeMismatch(_))
        ));
        assert!(QuotientSetup::new(&k, 1.2, Regime::Maximize).is_err());
        assert!(QuotientSetup::critical(&k).is_ok());
        let k2 = assemble(&m, KernelSpec::riesz(2.0)).unwrap();
        assert!(QuotientSetup::new(&k2, 0.5, Regime::Minimize).is_ok());
        assert!(QuotientSetup::new(&k2, 0.9, Regime::Minimize).is_err());
    }

    #[test]
    fn zero_density_rejected() {
        let m = build_flat_torus(1, 1.0, 8).unwrap();
        let k = assemble(&m, KernelSpec::riesz(0.5)).unwrap();
        let s = QuotientSetup::critical(&k).unwrap();
        let z = Density::constant(&m, 0.0).unwrap();
        assert_eq!(quotient(&s, &m, &z), Err(Error::ZeroDensity));
        assert!(Density::new(&m, alloc::vec![-1.0; 8]).is_err());
    }

    #[test]
    fn gradient_rejects_zero_entries_below_one() {
        let m = build_flat_torus(1, 1.0, 8).unwrap();
        let k = assemble(&m, KernelSpec::riesz(2.0)).unwrap();
        let s = QuotientSetup::critical(&k).unwrap();
        let f = Density::indicator(&m, 2).unwrap();
        assert!(matches!(
            gradient(&s, &m, &f),
            Err(Error::NonPositiveDensity { .. })
        ));
    }

    #[test]
    fn transposed_contraction_agrees() {
        let m = build_sphere(2, 120, DistanceMode::Geodesic).unwrap();
        let k = assemble(&m, KernelSpec::riesz(1.0)).unwrap();
        let f = Density::from_fn(&m, |x| 1.0 + x[0] * x[0]).unwrap();
        let g = Density::from_fn(&m, |x| 2.0 + x[2]).unwrap();
        let a = bilinear(&k, &m, &f, &g).unwrap();
        let b = bilinear_transposed(&k, &m, &f, &g).unwrap();
        let c = bilinear(&k, &m, &g, &f).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
        assert_relative_eq!(a, c, max_relative = 1e-12);
    }
}
