//! Dense kernel matrices for the Riesz and Green-power operators.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::functional::Density;
use crate::geometry::{ManifoldId, ManifoldKind, QuadratureManifold, DEFAULT_NODE_BUDGET};
use crate::math::unit_ball_volume;
use crate::quadrature;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum KernelMode {
    /// d^{α−n} in the manifold distance.
    Riesz,
    /// Chordal d^{α−n}: the Green power on the round sphere, normalized so
    /// that G = r^{2−n} with zero mass.
    GreenSphere,
    /// (d^{2−n} + A)^{(α−n)/(2−n)} on a Euclidean patch of diameter ≤ `delta0`.
    GreenSynthetic { mass: f64, delta0: f64 },
    /// Matrix supplied by the caller.
    Custom,
}

impl KernelMode {
    pub fn name(&self) -> &'static str {
        match self {
            KernelMode::Riesz => "riesz",
            KernelMode::GreenSphere => "green-sphere",
            KernelMode::GreenSynthetic { .. } => "green-synthetic",
            KernelMode::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub alpha: f64,
    #[serde(flatten)]
    pub mode: KernelMode,
}

impl KernelSpec {
    pub fn riesz(alpha: f64) -> Self {
        KernelSpec {
            alpha,
            mode: KernelMode::Riesz,
        }
    }

    pub fn green_sphere(alpha: f64) -> Self {
        KernelSpec {
            alpha,
            mode: KernelMode::GreenSphere,
        }
    }

    pub fn green_synthetic(alpha: f64, mass: f64, delta0: f64) -> Self {
        KernelSpec {
            alpha,
            mode: KernelMode::GreenSynthetic { mass, delta0 },
        }
    }

    /// Checks the spec against a manifold without assembling anything.
    pub fn validate(&self, m: &QuadratureManifold) -> Result<()> {
        let n = m.dim();
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: "must be positive".into(),
            });
        }
        if self.alpha == n as f64 {
            return Err(Error::AlphaEqualsDimension { dim: n });
        }
        match self.mode {
            KernelMode::Riesz => Ok(()),
            KernelMode::GreenSphere if m.kind().is_sphere() => Ok(()),
            KernelMode::GreenSphere => Err(Error::KernelModeMismatch {
                mode: "green-sphere",
                kind: m.kind().as_str(),
            }),
            KernelMode::GreenSynthetic { mass, delta0 } => {
                if m.kind() != ManifoldKind::EuclideanPatch {
                    return Err(Error::KernelModeMismatch {
                        mode: "green-synthetic",
                        kind: m.kind().as_str(),
                    });
                }
                if n < 3 {
                    return Err(Error::UnsupportedDimension {
                        dim: n,
                        what: "green-synthetic kernel (needs n >= 3)",
                    });
                }
                if !(mass >= 0.0 && mass.is_finite()) {
                    return Err(Error::InvalidParameter {
                        name: "mass",
                        reason: "must be nonnegative".into(),
                    });
                }
                if !(delta0 > 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "delta0",
                        reason: "must be positive".into(),
                    });
                }
                if m.diameter() > delta0 * (1.0 + 1e-12) {
                    return Err(Error::InvalidParameter {
                        name: "delta0",
                        reason: "the expansion is only modelled for distances below delta0; patch diameter exceeds it"
                            .into(),
                    });
                }
                Ok(())
            }
            KernelMode::Custom => Err(Error::InvalidParameter {
                name: "mode",
                reason: "custom kernels are built with KernelMatrix::custom".into(),
            }),
        }
    }
}

/// Pure kernel samples k(d_ij), row-major, no quadrature weights folded in.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    values: Vec<f64>,
    size: usize,
    dim: usize,
    spec: KernelSpec,
    manifold_id: ManifoldId,
}

impl KernelMatrix {
    /// Wraps a caller-supplied symmetric nonnegative matrix. `alpha` only
    /// fixes the regime (α < dim or α > dim) of quotients built on it.
    pub fn custom(m: &QuadratureManifold, alpha: f64, values: Vec<f64>) -> Result<Self> {
        let n = m.node_count();
        if values.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: values.len(),
            });
        }
        if alpha == m.dim() as f64 {
            return Err(Error::AlphaEqualsDimension { dim: m.dim() });
        }
        for i in 0..n {
            for j in 0..n {
                let v = values[i * n + j];
                if !(v >= 0.0 && v.is_finite()) || v != values[j * n + i] {
                    return Err(Error::InvalidParameter {
                        name: "values",
                        reason: "kernel must be symmetric, finite and nonnegative".into(),
                    });
                }
            }
        }
        Ok(KernelMatrix {
            values,
            size: n,
            dim: m.dim(),
            spec: KernelSpec {
                alpha,
                mode: KernelMode::Custom,
            },
            manifold_id: m.id(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.size..(i + 1) * self.size]
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn alpha(&self) -> f64 {
        self.spec.alpha
    }

    pub fn manifold_id(&self) -> ManifoldId {
        self.manifold_id
    }

    pub fn check_manifold(&self, m: &QuadratureManifold) -> Result<()> {
        if self.manifold_id != m.id() {
            return Err(Error::ManifoldMismatch);
        }
        Ok(())
    }

    /// (I f)_i = Σ_j K_ij w_j f_j at every node.
    pub fn apply(&self, m: &QuadratureManifold, f: &Density) -> Result<Vec<f64>> {
        self.check_manifold(m)?;
        f.check_manifold(m)?;
        Ok(self.apply_weighted(m.weights(), f.values()))
    }

    /// Same contraction on raw slices; no manifold bookkeeping and no sign
    /// requirement on `values`.
    pub fn apply_weighted(&self, weights: &[f64], values: &[f64]) -> Vec<f64> {
        assert_eq!(weights.len(), self.size);
        assert_eq!(values.len(), self.size);
        let wf: Vec<f64> = weights.iter().zip(values).map(|(w, f)| w * f).collect();
        let mut out = vec![0.0; self.size];
        let row_dot = |(i, o): (usize, &mut f64)| {
            *o = self.row(i).iter().zip(&wf).map(|(k, x)| k * x).sum();
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            out.par_iter_mut().enumerate().for_each(row_dot);
        }
        #[cfg(not(feature = "parallel"))]
        out.iter_mut().enumerate().for_each(row_dot);
        out
    }
}

/// Assembles the kernel with the default node budget.
pub fn assemble(m: &QuadratureManifold, spec: KernelSpec) -> Result<KernelMatrix> {
    assemble_with_budget(m, spec, DEFAULT_NODE_BUDGET)
}

pub fn assemble_with_budget(
    m: &QuadratureManifold,
    spec: KernelSpec,
    budget: usize,
) -> Result<KernelMatrix> {
    spec.validate(m)?;
    let size = m.node_count();
    if size > budget {
        return Err(Error::NodeBudget {
            requested: size,
            budget,
        });
    }
    let n = m.dim();
    let nf = n as f64;
    let alpha = spec.alpha;
    let expo = alpha - nf;
    let chordal_from_geodesic = m.kind() == ManifoldKind::SphereGeodesic;
    let radius = m.scale();
    let entry = |d: f64| -> f64 {
        match spec.mode {
            KernelMode::Riesz => d.powf(expo),
            KernelMode::GreenSphere => {
                let c = if chordal_from_geodesic {
                    2.0 * radius * (d / (2.0 * radius)).sin()
                } else {
                    d
                };
                c.powf(expo)
            }
            KernelMode::GreenSynthetic { mass, .. } => {
                let e = expo / (2.0 - nf);
                (d.powf(2.0 - nf) + mass).powf(e)
            }
            KernelMode::Custom => unreachable!(),
        }
    };

    let mut values = vec![0.0; size * size];
    let fill_row = |(i, row): (usize, &mut [f64])| {
        let drow = m.distance_row(i);
        for j in 0..size {
            if j != i {
                row[j] = entry(drow[j]);
            }
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        values.par_chunks_mut(size).enumerate().for_each(fill_row);
    }
    #[cfg(not(feature = "parallel"))]
    values.chunks_mut(size).enumerate().for_each(fill_row);

    if expo < 0.0 {
        let mut cache: Option<(f64, f64)> = None;
        for i in 0..size {
            let w = m.weights()[i];
            let diag = match cache {
                Some((cw, cv)) if cw == w => cv,
                _ => {
                    let v = self_cell_value(n, alpha, spec.mode, w);
                    cache = Some((w, v));
                    v
                }
            };
            values[i * size + i] = diag;
        }
        for j in 0..size {
            for i in 0..size {
                if i != j && !values[i * size + j].is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "distances",
                        reason: "coincident nodes make a singular kernel infinite".into(),
                    });
                }
            }
        }
    }
    Ok(KernelMatrix {
        values,
        size,
        dim: n,
        spec,
        manifold_id: m.id(),
    })
}

/// Diagonal value for a singular kernel: the kernel integrated over the ball
/// of volume `w` around the node, divided by `w`.
fn self_cell_value(n: usize, alpha: f64, mode: KernelMode, w: f64) -> f64 {
    let omega = unit_ball_volume(n);
    let nf = n as f64;
    let r = (w / omega).powf(1.0 / nf);
    match mode {
        KernelMode::GreenSynthetic { mass, .. } if mass > 0.0 => {
            // ∫_{B_r} (|z|^{2−n} + A)^e dz = (nω_n/α) ∫_0^{r^α} (1 + A t^{(n−2)/α})^e dt
            let e = (alpha - nf) / (2.0 - nf);
            let s = (nf - 2.0) / alpha;
            let q = quadrature::integrate(
                |t| (1.0 + mass * t.powf(s)).powf(e),
                0.0,
                r.powf(alpha),
                1e-14,
            );
            nf * omega * q.value / alpha / w
        }
        _ => nf * omega * r.powf(alpha) / alpha / w,
    }
}
