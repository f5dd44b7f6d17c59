//! Seeded random densities and kernels.

use std::f64::consts::PI;

use hls_core::{Density, ManifoldKind, QuadratureManifold};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r2: f64 = v.iter().map(|x| x * x).sum();
        if r2 > 1e-4 && r2 <= 1.0 {
            let r = r2.sqrt();
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

/// Smooth, strictly positive density: a floor plus one to four bumps of
/// random width (von Mises on spheres, periodic on the torus, Gaussian on
/// the patch). Abstract systems get iid values in [0.05, 1].
pub fn smooth_density<R: Rng>(m: &QuadratureManifold, rng: &mut R) -> Density {
    let n = m.dim();
    let bumps = rng.random_range(1..=4);
    let floor = rng.random_range(0.05..0.5);
    let mut values = vec![floor; m.node_count()];
    match m.kind() {
        ManifoldKind::Abstract => {
            for v in values.iter_mut() {
                *v = rng.random_range(0.05..1.0);
            }
        }
        kind => {
            for _ in 0..bumps {
                let amp = rng.random_range(0.2..2.0);
                match kind {
                    ManifoldKind::SphereChordal | ManifoldKind::SphereGeodesic => {
                        let mu = unit_vector(rng, n + 1);
                        let kappa = rng.random_range(1.0..20.0);
                        let r = m.scale();
                        for (i, v) in values.iter_mut().enumerate() {
                            let dot: f64 =
                                m.node(i).iter().zip(&mu).map(|(x, u)| x * u).sum::<f64>() / r;
                            *v += amp * (kappa * (dot - 1.0)).exp();
                        }
                    }
                    ManifoldKind::FlatTorus => {
                        let side = m.scale();
                        let mu: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..side)).collect();
                        let kappa = rng.random_range(1.0..10.0);
                        for (i, v) in values.iter_mut().enumerate() {
                            let s: f64 = m
                                .node(i)
                                .iter()
                                .zip(&mu)
                                .map(|(x, u)| (2.0 * PI * (x - u) / side).cos() - 1.0)
                                .sum();
                            *v += amp * (kappa * s).exp();
                        }
                    }
                    _ => {
                        let delta = m.scale();
                        let dir = unit_vector(rng, n);
                        let rad = rng.random_range(0.0..0.5) * delta;
                        let sigma = rng.random_range(0.05..0.5) * delta;
                        for (i, v) in values.iter_mut().enumerate() {
                            let d2: f64 = m
                                .node(i)
                                .iter()
                                .zip(&dir)
                                .map(|(x, u)| (x - rad * u).powi(2))
                                .sum();
                            *v += amp * (-d2 / (2.0 * sigma * sigma)).exp();
                        }
                    }
                }
            }
        }
    }
    Density::new(m, values).expect("positive finite values")
}

/// Rough nonnegative density: iid uniform values, roughly a fifth of them zero.
pub fn rough_density<R: Rng>(m: &QuadratureManifold, rng: &mut R) -> Density {
    let mut values: Vec<f64> = (0..m.node_count())
        .map(|_| {
            if rng.random_bool(0.2) {
                0.0
            } else {
                rng.random_range(0.0..1.0)
            }
        })
        .collect();
    if values.iter().all(|v| *v == 0.0) {
        values[0] = 1.0;
    }
    Density::new(m, values).expect("nonnegative finite values")
}

/// Strictly positive rough density (iid in [0.01, 1]).
pub fn positive_density<R: Rng>(m: &QuadratureManifold, rng: &mut R) -> Density {
    let values = (0..m.node_count())
        .map(|_| rng.random_range(0.01..1.0))
        .collect();
    Density::new(m, values).expect("positive finite values")
}

/// Random small weighted system: weights in [0.2, 2] and a symmetric kernel
/// with entries in [0, 2]. The diagonal is zero when `zero_diagonal` is set
/// (the α > n convention).
#[derive(Debug, Clone)]
pub struct RandomSystem {
    pub weights: Vec<f64>,
    pub kernel: Vec<f64>,
}

pub fn random_system<R: Rng>(rng: &mut R, size: usize, zero_diagonal: bool) -> RandomSystem {
    let weights = (0..size).map(|_| rng.random_range(0.2..2.0)).collect();
    let mut kernel = vec![0.0; size * size];
    for i in 0..size {
        for j in i..size {
            let v = if i == j {
                if zero_diagonal {
                    0.0
                } else {
                    rng.random_range(0.0..2.0)
                }
            } else {
                rng.random_range(0.05..2.0)
            };
            kernel[i * size + j] = v;
            kernel[j * size + i] = v;
        }
    }
    RandomSystem { weights, kernel }
}
