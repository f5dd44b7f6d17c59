use std::f64::consts::PI;

use hls_core::functional::{bilinear, gradient, quotient, quotient_raw};
use hls_core::geometry::{build_euclidean_patch, build_flat_torus, build_sphere};
use hls_core::kernel::assemble;
use hls_core::optimize::optimize;
use hls_core::{
    Density, DistanceMode, KernelMatrix, KernelSpec, QuadratureManifold, QuotientSetup, Regime,
    SolverOptions,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn sphere() -> &'static (QuadratureManifold, KernelMatrix) {
    static S: OnceLock<(QuadratureManifold, KernelMatrix)> = OnceLock::new();
    S.get_or_init(|| {
        let m = build_sphere(2, 150, DistanceMode::Geodesic).unwrap();
        let k = assemble(&m, KernelSpec::riesz(1.0)).unwrap();
        (m, k)
    })
}

fn torus() -> &'static QuadratureManifold {
    static T: OnceLock<QuadratureManifold> = OnceLock::new();
    T.get_or_init(|| build_flat_torus(2, 1.5, 7).unwrap())
}

fn patch() -> &'static QuadratureManifold {
    static P: OnceLock<QuadratureManifold> = OnceLock::new();
    P.get_or_init(|| build_euclidean_patch(3, 1.0, 125).unwrap())
}

fn density(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn triangle_inequality(i in 0usize..49, j in 0usize..49, k in 0usize..49, a in 0usize..125, b in 0usize..125, c in 0usize..125) {
        let t = torus();
        prop_assert!(t.distance(i, j) <= t.distance(i, k) + t.distance(k, j) + 1e-12);
        let p = patch();
        prop_assert!(p.distance(a, b) <= p.distance(a, c) + p.distance(c, b) + 1e-12);
    }

    #[test]
    fn sphere_chordal_geodesic_ordering(i in 0usize..150, j in 0usize..150) {
        let (g, _) = sphere();
        let d = g.distance(i, j);
        let chord = 2.0 * (d / 2.0).sin();
        prop_assert!(chord <= d + 1e-15);
        prop_assert!(d <= PI / 2.0 * chord + 1e-12);
    }

    #[test]
    fn quotient_is_scale_free(f in density(150), c in 1e-3f64..1e3) {
        let (m, k) = sphere();
        let s = QuotientSetup::critical(k).unwrap();
        let f = Density::new(m, f).unwrap();
        let j = quotient(&s, m, &f).unwrap();
        let jc = quotient(&s, m, &f.scaled(c).unwrap()).unwrap();
        prop_assert!((j - jc).abs() <= 1e-12 * j);
    }

    #[test]
    fn kernel_is_self_adjoint(f in density(150), g in density(150)) {
        let (m, k) = sphere();
        let f = Density::new(m, f).unwrap();
        let g = Density::new(m, g).unwrap();
        let a = bilinear(k, m, &f, &g).unwrap();
        let b = bilinear(k, m, &g, &f).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs());
    }

    #[test]
    fn kernel_is_monotone(f in density(150), bump in density(150)) {
        let (m, k) = sphere();
        let g: Vec<f64> = f.iter().zip(&bump).map(|(a, b)| a + b).collect();
        let kf = k.apply(m, &Density::new(m, f).unwrap()).unwrap();
        let kg = k.apply(m, &Density::new(m, g).unwrap()).unwrap();
        prop_assert!(kf.iter().zip(&kg).all(|(a, b)| a <= b));
    }

    // J is homogeneous of degree 0, so Σ f_i ∂_i J = 0.
    #[test]
    fn gradient_is_orthogonal_to_f(f in density(150)) {
        let (m, k) = sphere();
        let s = QuotientSetup::critical(k).unwrap();
        let dens = Density::new(m, f.clone()).unwrap();
        let g = gradient(&s, m, &dens).unwrap();
        let dot: f64 = g.iter().zip(&f).map(|(a, b)| a * b).sum();
        let scale: f64 = g.iter().zip(&f).map(|(a, b)| (a * b).abs()).sum();
        prop_assert!(dot.abs() <= 1e-12 * scale);
    }

    // Positive kernels: flipping signs never increases the energy, so the
    // supremum may be taken over nonnegative densities.
    #[test]
    fn signs_do_not_help(values in prop::collection::vec(-1.0f64..1.0, 2..=6), seed in 0u64..1000) {
        let n = values.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut next = || rng.random_range(0.0..1.0);
        let w: Vec<f64> = (0..n).map(|_| 0.2 + next()).collect();
        let mut kern = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = next();
                kern[i * n + j] = v;
                kern[j * n + i] = v;
            }
        }
        let dist: Vec<f64> = (0..n * n).map(|x| if x / n == x % n { 0.0 } else { 1.0 }).collect();
        let m = QuadratureManifold::abstract_system(1, w.clone(), dist).unwrap();
        let k = KernelMatrix::custom(&m, 0.5, kern).unwrap();
        prop_assume!(values.iter().any(|v| *v != 0.0));
        let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
        let signed = quotient_raw(&k, &w, &values, 1.5).unwrap();
        let unsigned = quotient_raw(&k, &w, &abs, 1.5).unwrap();
        prop_assert!(signed <= unsigned * (1.0 + 1e-14));
    }
}

#[test]
fn solver_is_invariant_to_init_scale() {
    let m = build_sphere(2, 200, DistanceMode::Chordal).unwrap();
    let k = assemble(&m, KernelSpec::riesz(1.0)).unwrap();
    let s = QuotientSetup::critical(&k).unwrap();
    let f = Density::from_fn(&m, |x| 1.0 + 0.5 * x[2]).unwrap();
    let opts = SolverOptions::default();
    let a = optimize(&s, &m, &f, &opts).unwrap();
    let b = optimize(&s, &m, &f.scaled(250.0).unwrap(), &opts).unwrap();
    assert!((a.value - b.value).abs() <= 1e-12 * a.value);
}

#[test]
fn extremal_bounds_random_densities_both_regimes() {
    let cases = [
        (KernelSpec::riesz(1.0), 2, Regime::Maximize),
        (KernelSpec::riesz(2.0), 1, Regime::Minimize),
    ];
    for (spec, n, regime) in cases {
        let m = build_sphere(n, 200, DistanceMode::Chordal).unwrap();
        let k = assemble(&m, spec).unwrap();
        let s = QuotientSetup::critical(&k).unwrap();
        let r = optimize(
            &s,
            &m,
            &Density::constant(&m, 1.0).unwrap(),
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(r.converged);
        for seed in 0..20u32 {
            let f = Density::from_fn(&m, |x| {
                let t = seed as f64 * 0.7;
                1.1 + x[0] * t.cos() + x[1] * t.sin() * 0.5
            })
            .unwrap();
            let j = quotient(&s, &m, &f).unwrap();
            match regime {
                Regime::Maximize => assert!(j <= r.value + 1e-9),
                Regime::Minimize => assert!(j >= r.value - 1e-9),
            }
        }
    }
}
