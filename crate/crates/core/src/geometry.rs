//! Quadrature discretizations of the model manifolds.
//!
//! A [`QuadratureManifold`] is a finite node set with positive weights and
//! the full pairwise distance matrix. Nodes are kept in embedding
//! coordinates (R^{n+1} for spheres, R^n otherwise) so the chordal distance
//! on spheres is exact.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::math::{sphere_area, unit_ball_volume};
use crate::{Error, Result};

/// Largest node count any builder accepts. The dense N×N matrices make this
/// the effective memory budget (16384 nodes ≈ 2 GiB per matrix).
pub const DEFAULT_NODE_BUDGET: usize = 16384;

/// Golden angle π(3 − √5).
const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ManifoldKind {
    SphereGeodesic,
    SphereChordal,
    FlatTorus,
    EuclideanPatch,
    /// Weighted point system with an explicit distance matrix; used for
    /// hand-built oracle systems and never serialized.
    Abstract,
}

impl ManifoldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ManifoldKind::SphereGeodesic => "sphere-geodesic",
            ManifoldKind::SphereChordal => "sphere-chordal",
            ManifoldKind::FlatTorus => "flat-torus",
            ManifoldKind::EuclideanPatch => "euclidean-patch",
            ManifoldKind::Abstract => "abstract",
        }
    }

    pub fn is_sphere(self) -> bool {
        matches!(
            self,
            ManifoldKind::SphereGeodesic | ManifoldKind::SphereChordal
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMode {
    Geodesic,
    Chordal,
}

/// Content fingerprint of a manifold. Densities and kernel matrices carry the
/// id of the manifold they were built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ManifoldId(pub u64);

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureManifold {
    dim: usize,
    kind: ManifoldKind,
    ambient_dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    distances: Vec<f64>,
    total_volume: f64,
    /// Sphere radius, torus side or patch radius.
    scale: f64,
    id: ManifoldId,
}

impl QuadratureManifold {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.ambient_dim..(i + 1) * self.ambient_dim]
    }

    /// Flat row-major node coordinates.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distances[i * self.node_count() + j]
    }

    pub fn distance_row(&self, i: usize) -> &[f64] {
        let n = self.node_count();
        &self.distances[i * n..(i + 1) * n]
    }

    /// Row-major N×N distance matrix.
    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    /// Analytic volume for spheres, tori and patches; Σ weights otherwise.
    pub fn total_volume(&self) -> f64 {
        self.total_volume
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn id(&self) -> ManifoldId {
        self.id
    }

    pub fn diameter(&self) -> f64 {
        match self.kind {
            ManifoldKind::SphereGeodesic => PI * self.scale,
            ManifoldKind::SphereChordal => 2.0 * self.scale,
            ManifoldKind::FlatTorus => self.scale * (self.dim as f64).sqrt() / 2.0,
            ManifoldKind::EuclideanPatch => 2.0 * self.scale,
            ManifoldKind::Abstract => self.distances.iter().fold(0.0, |m: f64, d| m.max(*d)),
        }
    }

    /// Distance between two points given in embedding coordinates.
    /// Unavailable for abstract systems.
    pub fn point_distance(&self, a: &[f64], b: &[f64]) -> Option<f64> {
        let d = match self.kind {
            ManifoldKind::SphereChordal | ManifoldKind::EuclideanPatch => euclid(a, b),
            ManifoldKind::SphereGeodesic => {
                let r = self.scale;
                let half = (euclid(a, b) / (2.0 * r)).min(1.0);
                2.0 * r * half.asin()
            }
            ManifoldKind::FlatTorus => {
                let side = self.scale;
                a.iter()
                    .zip(b)
                    .map(|(x, y)| {
                        let d = (x - y).abs();
                        let w = d.min((d - side).abs()).min((d + side).abs());
                        w * w
                    })
                    .sum::<f64>()
                    .sqrt()
            }
            ManifoldKind::Abstract => return None,
        };
        Some(d.min(self.diameter()))
    }

    /// Node closest to `point` (ties go to the lowest index).
    pub fn nearest_node(&self, point: &[f64]) -> Option<usize> {
        let mut best = None;
        let mut best_d = f64::INFINITY;
        for i in 0..self.node_count() {
            let d = self.point_distance(self.node(i), point)?;
            if d < best_d {
                best_d = d;
                best = Some(i);
            }
        }
        best
    }

    /// Rebuilds a manifold from serialized nodes and weights; distances
    /// are recomputed.
    pub fn from_parts(
        dim: usize,
        kind: ManifoldKind,
        nodes: Vec<f64>,
        weights: Vec<f64>,
        scale: f64,
    ) -> Result<Self> {
        let ambient_dim = match kind {
            ManifoldKind::SphereGeodesic | ManifoldKind::SphereChordal => dim + 1,
            ManifoldKind::FlatTorus | ManifoldKind::EuclideanPatch => dim,
            ManifoldKind::Abstract => {
                return Err(Error::InvalidParameter {
                    name: "kind",
                    reason: "abstract systems need an explicit distance matrix".into(),
                })
            }
        };
        if nodes.len() != weights.len() * ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: weights.len() * ambient_dim,
                found: nodes.len(),
            });
        }
        check_weights(&weights)?;
        check_budget(weights.len())?;
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "scale",
                reason: "must be positive".into(),
            });
        }
        let total_volume = match kind {
            ManifoldKind::SphereGeodesic | ManifoldKind::SphereChordal => {
                sphere_area(dim) * scale.powi(dim as i32)
            }
            ManifoldKind::FlatTorus => scale.powi(dim as i32),
            _ => weights.iter().sum(),
        };
        Ok(Self::finish(
            dim,
            kind,
            ambient_dim,
            nodes,
            weights,
            total_volume,
            scale,
        ))
    }

    /// Weighted point system with a caller-supplied symmetric distance matrix.
    pub fn abstract_system(dim: usize, weights: Vec<f64>, distances: Vec<f64>) -> Result<Self> {
        let n = weights.len();
        if distances.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: distances.len(),
            });
        }
        check_weights(&weights)?;
        for i in 0..n {
            if distances[i * n + i] != 0.0 {
                return Err(Error::InvalidParameter {
                    name: "distances",
                    reason: "diagonal must be zero".into(),
                });
            }
            for j in 0..n {
                let d = distances[i * n + j];
                if !(d >= 0.0 && d.is_finite()) || d != distances[j * n + i] {
                    return Err(Error::InvalidParameter {
                        name: "distances",
                        reason: "must be symmetric, finite and nonnegative".into(),
                    });
                }
            }
        }
        let total_volume = weights.iter().sum();
        let mut m = QuadratureManifold {
            dim,
            kind: ManifoldKind::Abstract,
            ambient_dim: 0,
            nodes: Vec::new(),
            weights,
            distances,
            total_volume,
            scale: 1.0,
            id: ManifoldId(0),
        };
        m.id = m.fingerprint();
        Ok(m)
    }

    fn finish(
        dim: usize,
        kind: ManifoldKind,
        ambient_dim: usize,
        nodes: Vec<f64>,
        weights: Vec<f64>,
        total_volume: f64,
        scale: f64,
    ) -> Self {
        let mut m = QuadratureManifold {
            dim,
            kind,
            ambient_dim,
            nodes,
            weights,
            distances: Vec::new(),
            total_volume,
            scale,
            id: ManifoldId(0),
        };
        m.distances = m.compute_distances();
        m.id = m.fingerprint();
        m
    }

    fn compute_distances(&self) -> Vec<f64> {
        let n = self.node_count();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = self
                    .point_distance(self.node(i), self.node(j))
                    .expect("distance defined for concrete kinds");
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        d
    }

    fn fingerprint(&self) -> ManifoldId {
        // FNV-1a over the defining data
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.dim as u64);
        eat(self.kind as u64);
        eat(self.weights.len() as u64);
        eat(self.scale.to_bits());
        for w in &self.weights {
            eat(w.to_bits());
        }
        for x in &self.nodes {
            eat(x.to_bits());
        }
        if self.kind == ManifoldKind::Abstract {
            for x in &self.distances {
                eat(x.to_bits());
            }
        }
        ManifoldId(h)
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::TooFewNodes {
            requested: 0,
            minimum: 1,
        });
    }
    if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidParameter {
            name: "weights",
            reason: "must be positive and finite".into(),
        });
    }
    Ok(())
}

fn check_budget(n: usize) -> Result<()> {
    if n > DEFAULT_NODE_BUDGET {
        Err(Error::NodeBudget {
            requested: n,
            budget: DEFAULT_NODE_BUDGET,
        })
    } else {
        Ok(())
    }
}

/// Quasi-uniform equal-weight discretization of the unit sphere S^n,
/// n ∈ {1, 2, 3}: uniform angles on S¹, a Fibonacci lattice on S², a
/// super-Fibonacci spiral on S³.
pub fn build_sphere(n: usize, count: usize, mode: DistanceMode) -> Result<QuadratureManifold> {
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedDimension {
            dim: n,
            what: "sphere",
        });
    }
    if count < 4 {
        return Err(Error::TooFewNodes {
            requested: count,
            minimum: 4,
        });
    }
    check_budget(count)?;
    let nodes = match n {
        1 => circle_points(count),
        2 => fibonacci_sphere(count),
        _ => super_fibonacci(count),
    };
    let area = sphere_area(n);
    let weights = vec![area / count as f64; count];
    let kind = match mode {
        DistanceMode::Geodesic => ManifoldKind::SphereGeodesic,
        DistanceMode::Chordal => ManifoldKind::SphereChordal,
    };
    Ok(QuadratureManifold::finish(
        n,
        kind,
        n + 1,
        nodes,
        weights,
        area,
        1.0,
    ))
}

fn circle_points(count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * count);
    for i in 0..count {
        let t = 2.0 * PI * i as f64 / count as f64;
        out.push(t.cos());
        out.push(t.sin());
    }
    out
}

fn fibonacci_sphere(count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(3 * count);
    for i in 0..count {
        let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let theta = GOLDEN_ANGLE * i as f64;
        out.push(r * theta.cos());
        out.push(r * theta.sin());
        out.push(z);
    }
    out
}

fn super_fibonacci(count: usize) -> Vec<f64> {
    const PHI: f64 = core::f64::consts::SQRT_2;
    const PSI: f64 = 1.533_751_168_755_204_3;
    let mut out = Vec::with_capacity(4 * count);
    for i in 0..count {
        let s = i as f64 + 0.5;
        let t = s / count as f64;
        let r = t.sqrt();
        let rr = (1.0 - t).sqrt();
        let a = 2.0 * PI * s / PHI;
        let b = 2.0 * PI * s / PSI;
        out.extend_from_slice(&[r * a.sin(), r * a.cos(), rr * b.sin(), rr * b.cos()]);
    }
    out
}

/// Uniform grid on the flat torus (R/LZ)^n with `per_axis` nodes per axis.
pub fn build_flat_torus(n: usize, side: f64, per_axis: usize) -> Result<QuadratureManifold> {
    if n == 0 {
        return Err(Error::UnsupportedDimension {
            dim: n,
            what: "flat torus",
        });
    }
    if !(side > 0.0 && side.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "side",
            reason: "must be positive".into(),
        });
    }
    if per_axis == 0 {
        return Err(Error::TooFewNodes {
            requested: 0,
            minimum: 1,
        });
    }
    let count = u32::try_from(n)
        .ok()
        .and_then(|e| per_axis.checked_pow(e))
        .ok_or(Error::NodeBudget {
            requested: usize::MAX,
            budget: DEFAULT_NODE_BUDGET,
        })?;
    check_budget(count)?;
    let h = side / per_axis as f64;
    let mut nodes = Vec::with_capacity(count * n);
    for idx in 0..count {
        let mut rest = idx;
        for _ in 0..n {
            nodes.push((rest % per_axis) as f64 * h);
            rest /= per_axis;
        }
    }
    let weights = vec![h.powi(n as i32); count];
    Ok(QuadratureManifold::finish(
        n,
        ManifoldKind::FlatTorus,
        n,
        nodes,
        weights,
        side.powi(n as i32),
        side,
    ))
}

/// Equal-volume product quadrature of the ball B_δ ⊂ R^n, n ∈ {1, 2, 3}.
///
/// n = 1 uses `count` midpoint cells. For n = 2, 3 the ball is cut into
/// K = round(count^{1/n}) concentric rings/shells of equal width and shell k
/// into k^n − (k−1)^n equal-volume cells, so the realized node count is K^n.
pub fn build_euclidean_patch(n: usize, radius: f64, count: usize) -> Result<QuadratureManifold> {
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedDimension {
            dim: n,
            what: "euclidean patch",
        });
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "radius",
            reason: "must be positive".into(),
        });
    }
    if count == 0 {
        return Err(Error::TooFewNodes {
            requested: 0,
            minimum: 1,
        });
    }
    let volume = unit_ball_volume(n) * radius.powi(n as i32);
    let nodes = match n {
        1 => {
            let h = 2.0 * radius / count as f64;
            (0..count)
                .map(|i| -radius + h * (i as f64 + 0.5))
                .collect::<Vec<_>>()
        }
        2 => {
            let shells = (count as f64).sqrt().round().max(1.0) as usize;
            check_budget(shells * shells)?;
            disk_nodes(radius, shells)
        }
        _ => {
            let shells = (count as f64).cbrt().round().max(1.0) as usize;
            check_budget(shells * shells * shells)?;
            ball_nodes(radius, shells)
        }
    };
    let realized = nodes.len() / n;
    check_budget(realized)?;
    let weights = vec![volume / realized as f64; realized];
    Ok(QuadratureManifold::finish(
        n,
        ManifoldKind::EuclideanPatch,
        n,
        nodes,
        weights,
        volume,
        radius,
    ))
}

fn disk_nodes(radius: f64, rings: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * rings * rings);
    for k in 1..=rings {
        let cells = 2 * k - 1;
        if cells == 1 {
            out.extend_from_slice(&[0.0, 0.0]);
            continue;
        }
        let r0 = radius * (k - 1) as f64 / rings as f64;
        let r1 = radius * k as f64 / rings as f64;
        let r = (0.5 * (r0 * r0 + r1 * r1)).sqrt();
        let offset = GOLDEN_ANGLE * k as f64;
        for j in 0..cells {
            let t = offset + 2.0 * PI * (j as f64 + 0.5) / cells as f64;
            out.push(r * t.cos());
            out.push(r * t.sin());
        }
    }
    out
}

fn ball_nodes(radius: f64, shells: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(3 * shells * shells * shells);
    for k in 1..=shells {
        let cells = 3 * k * k - 3 * k + 1;
        if cells == 1 {
            out.extend_from_slice(&[0.0, 0.0, 0.0]);
            continue;
        }
        let r0 = radius * (k - 1) as f64 / shells as f64;
        let r1 = radius * k as f64 / shells as f64;
        let r = (0.5 * (r0 * r0 * r0 + r1 * r1 * r1)).cbrt();
        let (s, c) = (GOLDEN_ANGLE * k as f64).sin_cos();
        let dirs = fibonacci_sphere(cells);
        for d in dirs.chunks_exact(3) {
            // rotate each shell about z so cells of adjacent shells do not align
            out.push(r * (c * d[0] - s * d[1]));
            out.push(r * (s * d[0] + c * d[1]));
            out.push(r * d[2]);
        }
    }
    out
}

/// Scales all lengths by `c`: distances by c, weights and volume by c^n.
pub fn rescale(m: &QuadratureManifold, c: f64) -> Result<QuadratureManifold> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "c",
            reason: "must be positive".into(),
        });
    }
    let vol = c.powi(m.dim as i32);
    let mut out = QuadratureManifold {
        dim: m.dim,
        kind: m.kind,
        ambient_dim: m.ambient_dim,
        nodes: m.nodes.iter().map(|x| x * c).collect(),
        weights: m.weights.iter().map(|w| w * vol).collect(),
        distances: m.distances.iter().map(|d| d * c).collect(),
        total_volume: m.total_volume * vol,
        scale: m.scale * c,
        id: ManifoldId(0),
    };
    out.id = out.fingerprint();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn circle_four_nodes_geodesic() {
        let m = build_sphere(1, 4, DistanceMode::Geodesic).unwrap();
        for i in 0..4 {
            assert_relative_eq!(m.distance(i, (i + 1) % 4), PI / 2.0, max_relative = 1e-15);
            assert_relative_eq!(m.weights()[i], PI / 2.0, max_relative = 1e-15);
        }
        assert_relative_eq!(m.distance(0, 2), PI, max_relative = 1e-15);
    }

    #[test]
    fn circle_chordal_vs_geodesic() {
        let c = build_sphere(1, 8, DistanceMode::Chordal).unwrap();
        let g = build_sphere(1, 8, DistanceMode::Geodesic).unwrap();
        assert_relative_eq!(
            c.distance(0, 1),
            2.0 * (PI / 8.0).sin(),
            max_relative = 1e-14
        );
        assert_relative_eq!(g.distance(0, 1), PI / 4.0, max_relative = 1e-14);
    }

    #[test]
    fn sphere_volumes() {
        for (n, area) in [(1, 2.0 * PI), (2, 4.0 * PI), (3, 2.0 * PI * PI)] {
            let m = build_sphere(n, 301, DistanceMode::Chordal).unwrap();
            let s: f64 = m.weights().iter().sum();
            assert_relative_eq!(s, area, max_relative = 1e-10);
            assert_relative_eq!(m.total_volume(), area, max_relative = 1e-15);
        }
    }

    #[test]
    fn sphere_nodes_are_unit_vectors() {
        for n in 1..=3 {
            let m = build_sphere(n, 97, DistanceMode::Geodesic).unwrap();
            for i in 0..m.node_count() {
                let r: f64 = m.node(i).iter().map(|x| x * x).sum();
                assert_relative_eq!(r, 1.0, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn sphere_errors() {
        assert!(matches!(
            build_sphere(4, 10, DistanceMode::Chordal),
            Err(Error::UnsupportedDimension { .. })
        ));
        assert!(matches!(
            build_sphere(2, 3, DistanceMode::Chordal),
            Err(Error::TooFewNodes { .. })
        ));
    }

    #[test]
    fn torus_wraparound() {
        let m = build_flat_torus(1, 1.0, 4).unwrap();
        assert_relative_eq!(m.distance(0, 3), 0.25, max_relative = 1e-15);
        let s: f64 = m.weights().iter().sum();
        assert_relative_eq!(s, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn torus_max_distance_matches_translate_search() {
        let side = 1.0;
        let m = build_flat_torus(2, side, 3).unwrap();
        // brute force over the 3^2 lattice translates
        let mut oracle_max: f64 = 0.0;
        for i in 0..m.node_count() {
            for j in 0..m.node_count() {
                let (a, b) = (m.node(i), m.node(j));
                let mut best = f64::INFINITY;
                for sx in [-1.0, 0.0, 1.0] {
                    for sy in [-1.0, 0.0, 1.0] {
                        let dx = a[0] - b[0] + sx * side;
                        let dy = a[1] - b[1] + sy * side;
                        best = best.min((dx * dx + dy * dy).sqrt());
                    }
                }
                assert_relative_eq!(m.distance(i, j), best, epsilon = 1e-15);
                oracle_max = oracle_max.max(best);
            }
        }
        let max = m.distances().iter().fold(0.0f64, |a, b| a.max(*b));
        assert_relative_eq!(max, oracle_max, epsilon = 1e-15);
        assert_relative_eq!(max, 2.0f64.sqrt() / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn torus_overflow() {
        assert!(build_flat_torus(64, 1.0, 1 << 20).is_err());
        assert!(matches!(
            build_flat_torus(3, 1.0, 40),
            Err(Error::NodeBudget { .. })
        ));
    }

    #[test]
    fn patch_volumes() {
        let m = build_euclidean_patch(1, 0.7, 50).unwrap();
        assert_relative_eq!(m.weights().iter().sum::<f64>(), 1.4, max_relative = 1e-12);
        let m = build_euclidean_patch(2, 1.0, 400).unwrap();
        assert_eq!(m.node_count(), 400);
        assert_relative_eq!(m.weights().iter().sum::<f64>(), PI, max_relative = 1e-8);
        let m = build_euclidean_patch(3, 2.0, 343).unwrap();
        assert_eq!(m.node_count(), 343);
        assert_relative_eq!(
            m.weights().iter().sum::<f64>(),
            4.0 / 3.0 * PI * 8.0,
            max_relative = 1e-8
        );
    }

    #[test]
    fn patch_nodes_inside_ball() {
        for n in 1..=3 {
            let m = build_euclidean_patch(n, 1.5, 200).unwrap();
            for i in 0..m.node_count() {
                let r: f64 = m.node(i).iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!(r < 1.5);
            }
        }
    }

    #[test]
    fn rescale_identity_and_torus_equivalence() {
        let m = build_flat_torus(2, 1.0, 5).unwrap();
        let same = rescale(&m, 1.0).unwrap();
        assert_eq!(same, m);
        let big = rescale(&m, 2.0).unwrap();
        let direct = build_flat_torus(2, 2.0, 5).unwrap();
        assert_relative_eq!(
            big.total_volume(),
            4.0 * m.total_volume(),
            max_relative = 1e-15
        );
        for (a, b) in big.distances().iter().zip(direct.distances()) {
            assert_relative_eq!(*a, *b, epsilon = 1e-14);
        }
        for (a, b) in big.weights().iter().zip(direct.weights()) {
            assert_relative_eq!(*a, *b, max_relative = 1e-15);
        }
    }

    #[test]
    fn abstract_system_validation() {
        assert!(
            QuadratureManifold::abstract_system(1, vec![1.0, 1.0], vec![0.0, 1.0, 1.0, 0.0])
                .is_ok()
        );
        assert!(
            QuadratureManifold::abstract_system(1, vec![1.0, 1.0], vec![0.0, 1.0, 2.0, 0.0])
                .is_err()
        );
        assert!(
            QuadratureManifold::abstract_system(1, vec![1.0, -1.0], vec![0.0, 1.0, 1.0, 0.0])
                .is_err()
        );
    }

    #[test]
    fn from_parts_recomputes_distances() {
        let m = build_sphere(2, 40, DistanceMode::Geodesic).unwrap();
        let back = QuadratureManifold::from_parts(
            2,
            m.kind(),
            m.nodes().to_vec(),
            m.weights().to_vec(),
            1.0,
        )
        .unwrap();
        assert_eq!(back, m);
    }
}
