//! Brute-force optimizers for tiny weighted systems, used as solver oracles.
//!
//! J is homogeneous of degree zero, so it suffices to search the simplex
//! Σ f_i = 1, f ≥ 0 (or positive rays for two nodes).

use std::f64::consts::FRAC_PI_2;

use hls_core::Regime;

/// J(f) = Σ w_i w_j f_i K_ij f_j / (Σ w_i f_i^p)^{2/p}, written out directly.
pub fn quotient(kernel: &[f64], weights: &[f64], f: &[f64], p: f64) -> f64 {
    let n = weights.len();
    let mut num = 0.0;
    for i in 0..n {
        for j in 0..n {
            num += weights[i] * weights[j] * f[i] * kernel[i * n + j] * f[j];
        }
    }
    let den: f64 = weights
        .iter()
        .zip(f)
        .map(|(w, v)| if *v == 0.0 { 0.0 } else { w * v.powf(p) })
        .sum();
    num / den.powf(2.0 / p)
}

fn better(regime: Regime, a: f64, b: f64) -> bool {
    match regime {
        Regime::Maximize => a > b,
        Regime::Minimize => a < b,
    }
}

/// Calls `visit` on every point of the simplex grid with spacing 1/steps.
fn for_each_simplex_point(n: usize, steps: usize, visit: &mut impl FnMut(&[f64])) {
    let mut counts = vec![0usize; n];
    let mut f = vec![0.0; n];
    fn rec(
        k: usize,
        left: usize,
        steps: usize,
        counts: &mut [usize],
        f: &mut [f64],
        visit: &mut impl FnMut(&[f64]),
    ) {
        let n = counts.len();
        if k == n - 1 {
            counts[k] = left;
            for (v, c) in f.iter_mut().zip(counts.iter()) {
                *v = *c as f64 / steps as f64;
            }
            visit(f);
            return;
        }
        for c in 0..=left {
            counts[k] = c;
            rec(k + 1, left - c, steps, counts, f, visit);
        }
    }
    rec(0, steps, steps, &mut counts, &mut f, visit);
}

/// Grid over the box |f_i − c_i| ≤ radius (first n−1 coordinates) intersected
/// with the simplex.
fn for_each_local_point(center: &[f64], radius: f64, h: f64, visit: &mut impl FnMut(&[f64])) {
    let n = center.len();
    let k = (radius / h).round() as i64;
    let mut f = vec![0.0; n];
    let mut offs = vec![-k; n - 1];
    loop {
        let mut ok = true;
        let mut sum = 0.0;
        for i in 0..n - 1 {
            let v = center[i] + offs[i] as f64 * h;
            if v < -1e-15 {
                ok = false;
                break;
            }
            f[i] = v.max(0.0);
            sum += f[i];
        }
        if ok {
            let last = 1.0 - sum;
            if last >= -1e-15 {
                f[n - 1] = last.max(0.0);
                visit(&f);
            }
        }
        let mut i = 0;
        while i < n - 1 {
            offs[i] += 1;
            if offs[i] <= k {
                break;
            }
            offs[i] = -k;
            i += 1;
        }
        if i == n - 1 {
            break;
        }
    }
}

/// Best value of J over the simplex: a 1e-2 grid, then 1e-3 and 1e-4 grids
/// around the four best separated coarse points.
pub fn simplex_scan(kernel: &[f64], weights: &[f64], p: f64, regime: Regime) -> (f64, Vec<f64>) {
    let n = weights.len();
    if n == 1 {
        return (quotient(kernel, weights, &[1.0], p), vec![1.0]);
    }
    let mut coarse: Vec<(f64, Vec<f64>)> = Vec::new();
    for_each_simplex_point(n, 100, &mut |f| {
        let v = quotient(kernel, weights, f, p);
        if v.is_finite() {
            coarse.push((v, f.to_vec()));
        }
    });
    coarse.sort_by(|a, b| match regime {
        Regime::Maximize => b.0.total_cmp(&a.0),
        Regime::Minimize => a.0.total_cmp(&b.0),
    });
    let mut seeds: Vec<Vec<f64>> = Vec::new();
    for (_, f) in &coarse {
        if seeds
            .iter()
            .all(|s| s.iter().zip(f).any(|(a, b)| (a - b).abs() > 0.05))
        {
            seeds.push(f.clone());
        }
        if seeds.len() == 4 {
            break;
        }
    }
    let mut best = coarse[0].clone();
    for seed in seeds {
        let mut local = (quotient(kernel, weights, &seed, p), seed);
        for (radius, h) in [(0.02, 1e-3), (0.002, 1e-4)] {
            let center = local.1.clone();
            for_each_local_point(&center, radius, h, &mut |f| {
                let v = quotient(kernel, weights, f, p);
                if v.is_finite() && better(regime, v, local.0) {
                    local = (v, f.to_vec());
                }
            });
        }
        if better(regime, local.0, best.0) {
            best = local;
        }
    }
    best
}

/// Two-node scan over rays (cos θ, sin θ), θ ∈ [0, π/2], with `samples` points.
pub fn ray_scan(
    kernel: &[f64],
    weights: &[f64],
    p: f64,
    regime: Regime,
    samples: usize,
) -> (f64, [f64; 2]) {
    assert_eq!(weights.len(), 2, "ray scan is for two-node systems");
    let mut best: Option<(f64, [f64; 2])> = None;
    for k in 0..samples {
        let t = FRAC_PI_2 * k as f64 / (samples - 1) as f64;
        let f = [t.cos().max(0.0), t.sin().max(0.0)];
        let v = quotient(kernel, weights, &f, p);
        if v.is_finite() && best.is_none_or(|b| better(regime, v, b.0)) {
            best = Some((v, f));
        }
    }
    best.expect("at least one finite sample")
}
