//! Numerical probes of the inequality machinery: weak-type profiles, Young
//! and conversed Young, partitions of unity, the ε-level inequality,
//! commutators and Euler–Lagrange constancy.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::analytic::sharp_constant_sphere;
use crate::functional::Density;
use crate::geometry::QuadratureManifold;
use crate::kernel::{assemble, KernelMatrix, KernelSpec};
use crate::math::{critical_exponent, hls_target_exponent, weighted_lq, weighted_power_sum};
use crate::optimize::QuotientResult;
use crate::stats::coefficient_of_variation;
use crate::{Error, Result};

/// Number of thresholds in a weak-type profile.
pub const PROFILE_POINTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakTypeProfile {
    pub lambdas: Vec<f64>,
    pub measures: Vec<f64>,
    pub normalized: Vec<f64>,
    pub sup_constant: f64,
    pub q: f64,
    pub reversed: bool,
}

/// Distribution function of |I_α f| on a log grid of 64 thresholds over
/// [min⁺, max]. Classical: m{|I f| > λ}; reversed: m{|I f| < λ}. The
/// normalized value is λ^q m / ‖f‖_p^q with 1/q = 1/p − α/n.
pub fn weak_type_profile(
    k: &KernelMatrix,
    m: &QuadratureManifold,
    f: &Density,
    p: f64,
    reversed: bool,
) -> Result<WeakTypeProfile> {
    let q = hls_target_exponent(k.dim(), k.alpha(), p)
        .ok_or_else(|| Error::ExponentRelation(format!("1/p = α/n at p = {p}")))?;
    if reversed && q >= 0.0 {
        return Err(Error::ExponentRelation(format!(
            "reversed profile needs q < 0, got {q}"
        )));
    }
    if !reversed && q <= 0.0 {
        return Err(Error::ExponentRelation(format!(
            "classical profile needs q > 0, got {q}"
        )));
    }
    let u: Vec<f64> = k.apply(m, f)?.into_iter().map(f64::abs).collect();
    let w = m.weights();
    let norm = weighted_power_sum(w, f.values(), p).powf(1.0 / p);
    if norm == 0.0 {
        if reversed {
            return Err(Error::ZeroDensity);
        }
        let lambdas = log_grid(1e-12, 1.0);
        return Ok(WeakTypeProfile {
            measures: vec![0.0; lambdas.len()],
            normalized: vec![0.0; lambdas.len()],
            lambdas,
            sup_constant: 0.0,
            q,
            reversed,
        });
    }
    let lo = u
        .iter()
        .copied()
        .filter(|v| *v > 0.0)
        .fold(f64::INFINITY, f64::min);
    let hi = u.iter().copied().fold(0.0, f64::max);
    let lambdas = if lo < hi {
        log_grid(lo, hi)
    } else {
        vec![hi; 1]
    };
    let mut measures = Vec::with_capacity(lambdas.len());
    let mut normalized = Vec::with_capacity(lambdas.len());
    let mut sup: f64 = 0.0;
    for &l in &lambdas {
        let meas: f64 = u
            .iter()
            .zip(w)
            .filter(|(v, _)| if reversed { **v < l } else { **v > l })
            .map(|(_, w)| w)
            .sum();
        let nv = l.powf(q) * meas / norm.powf(q);
        sup = sup.max(nv);
        measures.push(meas);
        normalized.push(nv);
    }
    Ok(WeakTypeProfile {
        lambdas,
        measures,
        normalized,
        sup_constant: sup,
        q,
        reversed,
    })
}

fn log_grid(lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..PROFILE_POINTS)
        .map(|i| {
            if i == PROFILE_POINTS - 1 {
                hi
            } else if i == 0 {
                lo
            } else {
                (a + (b - a) * i as f64 / (PROFILE_POINTS - 1) as f64).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YoungCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// lhs / rhs: ≤ C means the classical inequality holds with constant C,
    /// ≥ C the conversed one.
    pub constant: f64,
    pub holds: bool,
}

/// ‖g ∗ h‖_r against ‖g‖_q ‖h‖_p with (g ∗ h)(x) = ∫ g(y) h(|y − x|) dV_y.
///
/// ‖h‖_p is the mean over nodes x of ‖h(|· − x|)‖_p, exact for homogeneous
/// node sets such as the torus grid. `holds` compares the constant against
/// `threshold`: classical needs constant ≤ threshold, conversed
/// (p ∈ (0,1), q, r < 0, positive g, h) needs constant ≥ threshold.
#[allow(clippy::too_many_arguments)]
pub fn young_check<H: Fn(f64) -> f64>(
    m: &QuadratureManifold,
    g: &[f64],
    h: H,
    p: f64,
    q: f64,
    r: f64,
    reversed: bool,
    threshold: f64,
) -> Result<YoungCheck> {
    let n = m.node_count();
    if g.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.len(),
        });
    }
    let defect = 1.0 + 1.0 / r - 1.0 / q - 1.0 / p;
    if defect.abs() > 1e-12 {
        return Err(Error::ExponentRelation(format!(
            "1 + 1/r − 1/q − 1/p = {defect:e}"
        )));
    }
    if reversed {
        if !(p > 0.0 && p < 1.0 && q < 0.0 && r < 0.0) {
            return Err(Error::ExponentRelation(
                "conversed Young needs p ∈ (0,1), q < 0, r < 0".into(),
            ));
        }
    } else if !(p >= 1.0 && q >= 1.0 && r >= 1.0) {
        return Err(Error::ExponentRelation(
            "classical Young needs p, q, r ≥ 1".into(),
        ));
    }
    let w = m.weights();
    let mut conv = vec![0.0; n];
    let mut h_norm_sum = 0.0;
    for i in 0..n {
        let row = m.distance_row(i);
        let hv: Vec<f64> = row.iter().map(|d| h(*d)).collect();
        if reversed && hv.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidParameter {
                name: "h",
                reason: "conversed Young needs h > 0".into(),
            });
        }
        conv[i] = hv.iter().zip(g).zip(w).map(|((h, g), w)| h * g * w).sum();
        h_norm_sum += weighted_lq(w, &hv, p);
    }
    if reversed && g.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter {
            name: "g",
            reason: "conversed Young needs g > 0".into(),
        });
    }
    let h_norm = h_norm_sum / n as f64;
    let lhs = weighted_lq(w, &conv, r);
    let rhs = weighted_lq(w, g, q) * h_norm;
    let constant = lhs / rhs;
    let holds = if reversed {
        constant >= threshold
    } else {
        constant <= threshold
    };
    Ok(YoungCheck {
        lhs,
        rhs,
        constant,
        holds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cap {
    pub center: [f64; 4],
    pub radius: f64,
}

impl Cap {
    /// Cap around an embedding-space point of up to four coordinates.
    pub fn new(center: &[f64], radius: f64) -> Self {
        let mut c = [0.0; 4];
        c[..center.len()].copy_from_slice(center);
        Cap { center: c, radius }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionOfUnity {
    /// etas[i][node].
    pub etas: Vec<Vec<f64>>,
    pub p: f64,
    pub caps: Vec<Cap>,
}

impl PartitionOfUnity {
    /// max over nodes of |Σ_i η_i^p − 1|.
    pub fn normalization_defect(&self) -> f64 {
        let n = self.etas.first().map_or(0, Vec::len);
        (0..n)
            .map(|j| (self.etas.iter().map(|e| e[j].powf(self.p)).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Cosine bump ½(1 + cos(π d / r)) for d < r.
fn taper(d: f64, r: f64) -> f64 {
    if d < r {
        0.5 * (1.0 + (PI * d / r).cos())
    } else {
        0.0
    }
}

/// η_i = φ_i / (Σ_j φ_j^p)^{1/p} with cosine-taper bumps φ_i on the caps.
pub fn build_partition(m: &QuadratureManifold, caps: &[Cap], p: f64) -> Result<PartitionOfUnity> {
    if caps.is_empty() {
        return Err(Error::InvalidParameter {
            name: "caps",
            reason: "empty".into(),
        });
    }
    if !(p > 0.0) {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: "must be positive".into(),
        });
    }
    let amb = m.ambient_dim();
    let n = m.node_count();
    let mut phis = vec![vec![0.0; n]; caps.len()];
    for (c, phi) in caps.iter().zip(phis.iter_mut()) {
        for (j, v) in phi.iter_mut().enumerate() {
            let d =
                m.point_distance(m.node(j), &c.center[..amb])
                    .ok_or(Error::KernelModeMismatch {
                        mode: "partition",
                        kind: m.kind().as_str(),
                    })?;
            *v = taper(d, c.radius);
        }
    }
    for j in 0..n {
        let s: f64 = phis.iter().map(|phi| phi[j].powf(p)).sum();
        if s == 0.0 {
            return Err(Error::UncoveredNode { index: j });
        }
        let norm = s.powf(1.0 / p);
        for phi in phis.iter_mut() {
            phi[j] = (phi[j] / norm).min(1.0);
        }
    }
    Ok(PartitionOfUnity {
        etas: phis,
        p,
        caps: caps.to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSample {
    /// ‖I_α f‖_q^p.
    pub lhs: f64,
    /// (N + ε)^p ‖f‖_p^p.
    pub main: f64,
    /// ‖I_{α+1} f‖_q^p.
    pub remainder: f64,
    /// Σ_i ‖η_i I_α f‖_q^p, the localized left side.
    pub localized: f64,
    /// Smallest C(ε) for this sample.
    pub c_needed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonLevelReport {
    pub n_constant: f64,
    pub epsilon: f64,
    pub c_epsilon: f64,
    pub all_hold: bool,
    pub samples: Vec<EpsilonSample>,
}

/// ‖I_α f‖_q^p ≤ (N + ε)^p ‖f‖_p^p + C(ε) ‖I_{α+1} f‖_q^p over the samples.
///
/// With `n_constant = None` the flat sharp constant is used, which needs p
/// to be the critical exponent. Both operators use the Riesz kernel.
/// `all_hold` requires a finite C(ε) for every sample together with the
/// partition step ‖I_α f‖_q^p ≤ Σ_i ‖η_i I_α f‖_q^p.
pub fn epsilon_level_check(
    m: &QuadratureManifold,
    partition: &PartitionOfUnity,
    samples: &[Density],
    alpha: f64,
    p: f64,
    epsilon: f64,
    n_constant: Option<f64>,
) -> Result<EpsilonLevelReport> {
    let n = m.dim();
    let nf = n as f64;
    if !(alpha > 0.0 && alpha < nf) {
        return Err(Error::RegimeMismatch(format!(
            "ε-level inequality needs 0 < α < n, got α = {alpha}"
        )));
    }
    if !(p > 1.0) {
        return Err(Error::ExponentRelation(format!("need p > 1, got {p}")));
    }
    if (partition.p - p).abs() > 1e-14 {
        return Err(Error::ExponentRelation(
            "partition exponent differs from p".into(),
        ));
    }
    let q = hls_target_exponent(n, alpha, p)
        .filter(|q| *q > 0.0)
        .ok_or_else(|| {
            Error::ExponentRelation(format!("no positive target exponent for p = {p}"))
        })?;
    let nc = match n_constant {
        Some(c) => c,
        None => {
            let pc = critical_exponent(n, alpha);
            if (p - pc).abs() > 1e-12 * pc {
                return Err(Error::ExponentRelation(
                    "the flat constant is only known in closed form at the critical exponent"
                        .into(),
                ));
            }
            sharp_constant_sphere(n, alpha)?.value
        }
    };
    let k0 = assemble(m, KernelSpec::riesz(alpha))?;
    let k1 = assemble(m, KernelSpec::riesz(alpha + 1.0))?;
    let w = m.weights();
    let mut out = Vec::with_capacity(samples.len());
    let mut c_eps: f64 = 0.0;
    let mut all_hold = true;
    for f in samples {
        let i0 = k0.apply(m, f)?;
        let i1 = k1.apply(m, f)?;
        let lhs = weighted_lq(w, &i0, q).powf(p);
        let main = (nc + epsilon).powf(p) * weighted_power_sum(w, f.values(), p);
        let remainder = weighted_lq(w, &i1, q).powf(p);
        let localized: f64 = partition
            .etas
            .iter()
            .map(|eta| {
                let v: Vec<f64> = eta.iter().zip(&i0).map(|(e, u)| e * u).collect();
                weighted_lq(w, &v, q).powf(p)
            })
            .sum();
        let excess = (lhs - main).max(0.0);
        let c_needed = if excess == 0.0 {
            0.0
        } else {
            excess / remainder
        };
        if !c_needed.is_finite() || lhs > localized * (1.0 + 1e-12) {
            all_hold = false;
        }
        c_eps = c_eps.max(c_needed);
        out.push(EpsilonSample {
            lhs,
            main,
            remainder,
            localized,
            c_needed,
        });
    }
    Ok(EpsilonLevelReport {
        n_constant: nc,
        epsilon,
        c_epsilon: c_eps,
        all_hold,
        samples: out,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutatorNorm {
    pub lhs: f64,
    pub rhs_bound: f64,
    pub lipschitz: f64,
    pub ratio: f64,
}

/// Number of neighbours used for the discrete Lipschitz constant.
pub const LIPSCHITZ_NEIGHBOURS: usize = 8;

/// max over nodes i and their 8 nearest neighbours j of |η_i − η_j| / d_ij.
pub fn discrete_lipschitz(m: &QuadratureManifold, eta: &[f64]) -> f64 {
    let n = m.node_count();
    let mut best: f64 = 0.0;
    let mut idx: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        let row = m.distance_row(i);
        idx.clear();
        idx.extend((0..n).filter(|j| *j != i));
        let k = LIPSCHITZ_NEIGHBOURS.min(idx.len());
        if k == 0 {
            continue;
        }
        idx.select_nth_unstable_by(k - 1, |a, b| row[*a].total_cmp(&row[*b]).then(a.cmp(b)));
        for &j in &idx[..k] {
            if row[j] > 0.0 {
                best = best.max((eta[i] - eta[j]).abs() / row[j]);
            }
        }
    }
    best
}

/// lhs = ‖η I_α f − I_α(η f)‖_q, rhs = Lip(η) ‖I_{α+1} f‖_q.
pub fn commutator_norm(
    m: &QuadratureManifold,
    k_alpha: &KernelMatrix,
    k_alpha1: &KernelMatrix,
    f: &Density,
    eta: &[f64],
    q: f64,
) -> Result<CommutatorNorm> {
    let n = m.node_count();
    if eta.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: eta.len(),
        });
    }
    let w = m.weights();
    k_alpha.check_manifold(m)?;
    k_alpha1.check_manifold(m)?;
    f.check_manifold(m)?;
    // (η I f − I(η f))_i = Σ_j K_ij w_j f_j (η_i − η_j), exactly zero for constant η
    let wf: Vec<f64> = w.iter().zip(f.values()).map(|(w, v)| w * v).collect();
    let diff: Vec<f64> = (0..n)
        .map(|i| {
            k_alpha
                .row(i)
                .iter()
                .zip(&wf)
                .zip(eta)
                .map(|((k, x), e)| k * x * (eta[i] - e))
                .sum()
        })
        .collect();
    let lhs = weighted_lq(w, &diff, q);
    let i1 = k_alpha1.apply(m, f)?;
    let lipschitz = discrete_lipschitz(m, eta);
    let rhs_bound = lipschitz * weighted_lq(w, &i1, q);
    let ratio = if rhs_bound > 0.0 {
        lhs / rhs_bound
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(CommutatorNorm {
        lhs,
        rhs_bound,
        lipschitz,
        ratio,
    })
}

/// Coefficient of variation of (K_w f*)_i / (f*_i)^{p−1} over nodes with
/// f*_i > 0.
pub fn el_constancy(
    result: &QuotientResult,
    k: &KernelMatrix,
    m: &QuadratureManifold,
    p: f64,
) -> Result<f64> {
    if !result.converged {
        return Err(Error::NotConverged);
    }
    let f = &result.extremal;
    let kf = k.apply(m, f)?;
    let ratios: Vec<f64> = kf
        .iter()
        .zip(f.values())
        .filter(|(_, v)| **v > 0.0)
        .map(|(a, v)| a / v.powf(p - 1.0))
        .collect();
    if ratios.is_empty() {
        return Err(Error::ZeroDensity);
    }
    Ok(coefficient_of_variation(&ratios))
}
