//! Numerical studies behind the verify suites and the acceptance checks.
//! Each returns measured values only; thresholds live with the callers.

use hls_core::analytic::{
    a_term_integral, bubble_eval, exterior_tail, funk_hecke_image, sharp_constant_sphere,
    truncation_terms, BubbleParams,
};
use hls_core::diagnostics::{
    build_partition, commutator_norm, el_constancy, epsilon_level_check, weak_type_profile,
    young_check, Cap, WeakTypeProfile,
};
use hls_core::functional::{gradient, quotient};
use hls_core::geometry::{build_euclidean_patch, build_flat_torus, build_sphere};
use hls_core::kernel::assemble;
use hls_core::math::{critical_exponent, hls_target_exponent};
use hls_core::optimize::{multistart, optimize};
use hls_core::stats::fit_log_log;
use hls_core::{
    Density, DistanceMode, KernelMatrix, KernelSpec, QuadratureManifold, QuotientSetup, Regime,
    SolverOptions,
};
use rand::Rng;
use serde::Serialize;

use crate::error::LabResult;
use crate::oracle::{ray_scan, simplex_scan};
use crate::sampling::{positive_density, random_system, rng, rough_density, smooth_density};

#[derive(Debug, Clone, Serialize)]
pub struct RecoveryPoint {
    pub node_count: usize,
    pub value: f64,
    pub reference: f64,
    pub relative_gap: f64,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    /// None when the solver did not converge.
    pub el_cv: Option<f64>,
}

/// Solves the critical quotient from the constant density and reports the
/// gap to Y(n, α).
pub fn sphere_recovery(
    n: usize,
    alpha: f64,
    mode: DistanceMode,
    count: usize,
    opts: &SolverOptions,
) -> LabResult<RecoveryPoint> {
    let m = build_sphere(n, count, mode)?;
    let k = assemble(&m, KernelSpec::riesz(alpha))?;
    solve_critical(&m, &k, opts)
}

fn solve_critical(
    m: &QuadratureManifold,
    k: &KernelMatrix,
    opts: &SolverOptions,
) -> LabResult<RecoveryPoint> {
    let s = QuotientSetup::critical(k)?;
    let init = Density::constant(m, 1.0)?;
    let r = optimize(&s, m, &init, opts)?;
    let reference = sharp_constant_sphere(m.dim(), k.alpha())?.value;
    let el_cv = if r.converged {
        Some(el_constancy(&r, k, m, s.p())?)
    } else {
        None
    };
    Ok(RecoveryPoint {
        node_count: m.node_count(),
        value: r.value,
        reference,
        relative_gap: (r.value - reference) / reference,
        iterations: r.iterations,
        converged: r.converged,
        residual: r.residual,
        el_cv,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeCheck {
    pub infimum: f64,
    pub samples: usize,
    pub passed: usize,
    pub smallest_sample: f64,
}

/// Random nonnegative densities against a computed infimum (minimize regime).
pub fn lower_envelope(
    m: &QuadratureManifold,
    k: &KernelMatrix,
    infimum: f64,
    samples: usize,
    seed: u64,
) -> LabResult<EnvelopeCheck> {
    let s = QuotientSetup::critical(k)?;
    let mut r = rng(seed);
    let mut passed = 0;
    let mut smallest = f64::INFINITY;
    for i in 0..samples {
        let f = if i % 2 == 0 {
            smooth_density(m, &mut r)
        } else {
            rough_density(m, &mut r)
        };
        let j = quotient(&s, m, &f)?;
        smallest = smallest.min(j);
        if j >= infimum * (1.0 - 1e-12) {
            passed += 1;
        }
    }
    Ok(EnvelopeCheck {
        infimum,
        samples,
        passed,
        smallest_sample: smallest,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GapPoint {
    pub alpha: f64,
    pub mass: f64,
    /// (node count, Y) from coarse to fine.
    pub values: Vec<(usize, f64)>,
    pub reference: f64,
    /// First-order Richardson estimate of the error of the finest value.
    pub error_estimate: f64,
    /// Signed distance from the reference in the predicted direction.
    pub margin: f64,
    pub all_converged: bool,
    pub el_cv: Vec<Option<f64>>,
}

/// Green-synthetic patch in R³ of radius `delta` at two shell counts.
pub fn mass_gap(
    alpha: f64,
    mass: f64,
    delta: f64,
    shells: [usize; 2],
    opts: &SolverOptions,
) -> LabResult<GapPoint> {
    let mut values = Vec::new();
    let mut el = Vec::new();
    let mut all_converged = true;
    let mut reference = 0.0;
    for k in shells {
        let m = build_euclidean_patch(3, delta, k * k * k)?;
        let km = assemble(&m, KernelSpec::green_synthetic(alpha, mass, 2.0 * delta))?;
        let r = solve_critical(&m, &km, opts)?;
        values.push((r.node_count, r.value));
        el.push(r.el_cv);
        all_converged &= r.converged;
        reference = r.reference;
    }
    // the shell width is δ/K: with error ∝ h the fine error is |Δ| h₂/(h₁ − h₂)
    let (h1, h2) = (1.0 / shells[0] as f64, 1.0 / shells[1] as f64);
    let error_estimate = (values[1].1 - values[0].1).abs() * h2 / (h1 - h2);
    let fine = values[1].1;
    let margin = if alpha < 3.0 {
        fine - reference
    } else {
        reference - fine
    };
    Ok(GapPoint {
        alpha,
        mass,
        values,
        reference,
        error_estimate,
        margin,
        all_converged,
        el_cv: el,
    })
}

/// Slope of the A-term integral against λ at fixed δ.
pub fn a_term_slope(n: usize, alpha: f64, delta: f64, lambdas: &[f64]) -> LabResult<f64> {
    let vals = lambdas
        .iter()
        .map(|l| a_term_integral(n, alpha, delta, *l))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(fit_log_log(lambdas, &vals).slope)
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationSlopes {
    pub ratios: Vec<f64>,
    pub one: Vec<f64>,
    pub two: Vec<f64>,
    pub slope_one: f64,
    pub slope_two: f64,
}

pub fn truncation_slopes(n: usize, alpha: f64, ratios: &[f64]) -> LabResult<TruncationSlopes> {
    let mut one = Vec::new();
    let mut two = Vec::new();
    for &t in ratios {
        let tt = truncation_terms(n, alpha, t, 1.0)?;
        one.push(tt.one);
        two.push(tt.two);
    }
    Ok(TruncationSlopes {
        ratios: ratios.to_vec(),
        slope_one: fit_log_log(ratios, &one).slope,
        slope_two: fit_log_log(ratios, &two).slope,
        one,
        two,
    })
}

/// Max relative error of I_α applied to the centred bubble f_λ on the
/// patch B_δ ⊂ R^n against B f_λ^{(n−α)/(n+α)} minus the tail the patch
/// leaves out, at each node count.
pub fn funk_hecke_errors(
    n: usize,
    alpha: f64,
    lambda: f64,
    delta: f64,
    counts: &[usize],
) -> LabResult<Vec<(usize, f64)>> {
    let b = BubbleParams::centered(n, lambda, alpha)?;
    let mut out = Vec::new();
    for &c in counts {
        let m = build_euclidean_patch(n, delta, c)?;
        let k = assemble(&m, KernelSpec::riesz(alpha))?;
        let f = Density::from_fn(&m, |x| bubble_eval(&b, x))?;
        let u = k.apply(&m, &f)?;
        let mut worst: f64 = 0.0;
        for (i, ui) in u.iter().enumerate() {
            let y = m.node(i);
            let rho = y.iter().map(|v| v * v).sum::<f64>().sqrt().min(delta);
            let reference = funk_hecke_image(&b, y)? - exterior_tail(n, alpha, lambda, delta, rho)?;
            worst = worst.max((ui - reference).abs() / reference);
        }
        out.push((m.node_count(), worst));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct DilationStudy {
    pub epsilons: Vec<f64>,
    pub values: Vec<f64>,
    pub coarse_values: Vec<f64>,
    pub spread: f64,
    /// max over ε of |J_N − J_{N/4}|.
    pub error_estimate: f64,
}

/// Critical quotient of centred bubbles of several widths on a flat patch.
pub fn dilation(
    n: usize,
    alpha: f64,
    delta: f64,
    count: usize,
    epsilons: &[f64],
) -> LabResult<DilationStudy> {
    let eval = |c: usize| -> LabResult<Vec<f64>> {
        let m = build_euclidean_patch(n, delta, c)?;
        let k = assemble(&m, KernelSpec::riesz(alpha))?;
        let s = QuotientSetup::critical(&k)?;
        epsilons
            .iter()
            .map(|e| {
                let b = BubbleParams::centered(n, *e, alpha)?;
                let f = Density::from_fn(&m, |x| bubble_eval(&b, x))?;
                Ok(quotient(&s, &m, &f)?)
            })
            .collect()
    };
    let values = eval(count)?;
    let coarse_values = eval(count / 4)?;
    let hi = values.iter().copied().fold(f64::MIN, f64::max);
    let lo = values.iter().copied().fold(f64::MAX, f64::min);
    let error_estimate = values
        .iter()
        .zip(&coarse_values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(DilationStudy {
        epsilons: epsilons.to_vec(),
        values,
        coarse_values,
        spread: hi - lo,
        error_estimate,
    })
}

/// Relative spread (max − min)/mean of I_α 1 over the nodes.
pub fn constant_spread(m: &QuadratureManifold, spec: KernelSpec) -> LabResult<f64> {
    let k = assemble(m, spec)?;
    let u = k.apply(m, &Density::constant(m, 1.0)?)?;
    let hi = u.iter().copied().fold(f64::MIN, f64::max);
    let lo = u.iter().copied().fold(f64::MAX, f64::min);
    let mean = u.iter().sum::<f64>() / u.len() as f64;
    Ok((hi - lo) / mean)
}

/// max over c of |J(c f) − J(f)| / J(f) on random densities.
pub fn homogeneity_defect(
    m: &QuadratureManifold,
    k: &KernelMatrix,
    samples: usize,
    seed: u64,
) -> LabResult<f64> {
    let s = QuotientSetup::critical(k)?;
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let f = smooth_density(m, &mut r);
        let j = quotient(&s, m, &f)?;
        for c in [1e-3, 0.37, 7.5, 1e3] {
            let jc = quotient(&s, m, &f.scaled(c)?)?;
            worst = worst.max((jc - j).abs() / j);
        }
    }
    Ok(worst)
}

/// Worst norm-wise relative error max_i |g_i − g̃_i| / max_i |g_i| of the
/// analytic gradient against central differences.
pub fn gradient_error(
    m: &QuadratureManifold,
    k: &KernelMatrix,
    p: f64,
    samples: usize,
    seed: u64,
) -> LabResult<f64> {
    let regime = Regime::for_alpha(m.dim(), k.alpha())?;
    let s = QuotientSetup::new(k, p, regime)?;
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let f = smooth_density(m, &mut r);
        let g = gradient(&s, m, &f)?;
        let scale = f.values().iter().copied().fold(0.0, f64::max);
        let h = 1e-5 * scale;
        let mut num: f64 = 0.0;
        let mut den: f64 = 0.0;
        let mut v = f.values().to_vec();
        for i in 0..v.len() {
            let x = v[i];
            v[i] = x + h;
            let jp = quotient(&s, m, &Density::new(m, v.clone())?)?;
            v[i] = x - h;
            let jm = quotient(&s, m, &Density::new(m, v.clone())?)?;
            v[i] = x;
            let fd = (jp - jm) / (2.0 * h);
            num = num.max((fd - g[i]).abs());
            den = den.max(g[i].abs());
        }
        worst = worst.max(num / den);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleComparison {
    pub size: usize,
    pub regime: Regime,
    pub cases: usize,
    /// max |solver − brute force|.
    pub worst_difference: f64,
    /// Cases where the solver value beats the brute-force value by more than
    /// 1e-4 (the scan missed the optimum).
    pub oracle_misses: usize,
}

/// Solver against brute-force search on random weighted systems. The solver
/// runs from the constant density and one start concentrated at each node.
pub fn oracle_comparison(
    size: usize,
    regime: Regime,
    cases: usize,
    seed: u64,
) -> LabResult<OracleComparison> {
    let (alpha, p) = match regime {
        Regime::Maximize => (0.5, 1.5),
        Regime::Minimize => (2.0, 0.5),
    };
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    let mut misses = 0;
    for _ in 0..cases {
        let sys = random_system(&mut r, size, false);
        let dist: Vec<f64> = (0..size * size)
            .map(|x| if x / size == x % size { 0.0 } else { 1.0 })
            .collect();
        let m = QuadratureManifold::abstract_system(1, sys.weights.clone(), dist)?;
        let k = KernelMatrix::custom(&m, alpha, sys.kernel.clone())?;
        let s = QuotientSetup::new(&k, p, regime)?;
        let mut inits = vec![Density::constant(&m, 1.0)?];
        for i in 0..size {
            let v = (0..size).map(|j| if i == j { 1.0 } else { 0.05 }).collect();
            inits.push(Density::new(&m, v)?);
        }
        let res = multistart(
            &s,
            &m,
            &inits,
            &SolverOptions {
                tol: 1e-12,
                ..SolverOptions::default()
            },
        )?;
        let (brute, _) = simplex_scan(&sys.kernel, &sys.weights, p, regime);
        let brute = if size == 2 {
            let (ray, _) = ray_scan(&sys.kernel, &sys.weights, p, regime, 10_000);
            match regime {
                Regime::Maximize => brute.max(ray),
                Regime::Minimize => brute.min(ray),
            }
        } else {
            brute
        };
        let d = res.value - brute;
        let beats = match regime {
            Regime::Maximize => d > 1e-4,
            Regime::Minimize => d < -1e-4,
        };
        if beats {
            misses += 1;
        }
        worst = worst.max(d.abs());
    }
    Ok(OracleComparison {
        size,
        regime,
        cases,
        worst_difference: worst,
        oracle_misses: misses,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakTypeTrend {
    pub counts: Vec<usize>,
    /// max over samples of the sup constant, per count.
    pub sup_constants: Vec<f64>,
    pub slope: f64,
}

/// Sup constants of weak-type profiles on the sphere under refinement, with
/// the densities defined by the same seeded bump parameters at every N.
pub fn weak_type_trend(
    n: usize,
    alpha: f64,
    p: f64,
    counts: &[usize],
    samples: usize,
    seed: u64,
    reversed: bool,
) -> LabResult<(WeakTypeTrend, WeakTypeProfile)> {
    let mut sups = Vec::new();
    let mut example = None;
    for &c in counts {
        let m = build_sphere(n, c, DistanceMode::Chordal)?;
        let k = assemble(&m, KernelSpec::riesz(alpha))?;
        let mut r = rng(seed);
        let mut worst: f64 = 0.0;
        for i in 0..samples {
            let f = smooth_density(&m, &mut r);
            let prof = weak_type_profile(&k, &m, &f, p, reversed)?;
            worst = worst.max(prof.sup_constant);
            if i == 0 {
                example = Some(prof);
            }
        }
        sups.push(worst);
    }
    let xs: Vec<f64> = counts.iter().map(|c| *c as f64).collect();
    let slope = fit_log_log(&xs, &sups).slope;
    Ok((
        WeakTypeTrend {
            counts: counts.to_vec(),
            sup_constants: sups,
            slope,
        },
        example.expect("samples > 0"),
    ))
}

/// Six caps around ±e_i on S² with chordal radius 1.2.
pub fn octahedral_caps() -> Vec<Cap> {
    let mut caps = Vec::new();
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let mut c = [0.0; 3];
            c[axis] = sign;
            caps.push(Cap::new(&c, 1.2));
        }
    }
    caps
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsilonTrend {
    pub counts: Vec<usize>,
    pub c_epsilon: Vec<f64>,
    pub all_hold: bool,
    pub partition_defect: f64,
}

/// ε-level inequality on chordal S² at the critical exponent of α. With
/// `n_constant = None` the leading constant is Y(2, α).
pub fn epsilon_trend(
    alpha: f64,
    epsilon: f64,
    n_constant: Option<f64>,
    counts: &[usize],
    samples: usize,
    seed: u64,
) -> LabResult<EpsilonTrend> {
    let p = critical_exponent(2, alpha);
    let mut c_eps = Vec::new();
    let mut all_hold = true;
    let mut defect: f64 = 0.0;
    for &c in counts {
        let m = build_sphere(2, c, DistanceMode::Chordal)?;
        let part = build_partition(&m, &octahedral_caps(), p)?;
        defect = defect.max(part.normalization_defect());
        let mut r = rng(seed);
        let mut fs: Vec<Density> = (0..samples).map(|_| smooth_density(&m, &mut r)).collect();
        fs.push(Density::constant(&m, 1.0)?);
        let rep = epsilon_level_check(&m, &part, &fs, alpha, p, epsilon, n_constant)?;
        all_hold &= rep.all_hold;
        c_eps.push(rep.c_epsilon);
    }
    Ok(EpsilonTrend {
        counts: counts.to_vec(),
        c_epsilon: c_eps,
        all_hold,
        partition_defect: defect,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutatorTrend {
    pub counts: Vec<usize>,
    /// max over samples of lhs / rhs_bound, per count.
    pub ratios: Vec<f64>,
    pub slope: f64,
}

/// Commutator ratio on chordal S² for random (f, η) pairs, η one of the
/// partition functions.
pub fn commutator_trend(
    alpha: f64,
    counts: &[usize],
    samples: usize,
    seed: u64,
) -> LabResult<CommutatorTrend> {
    let p = critical_exponent(2, alpha);
    let q = hls_target_exponent(2, alpha, p).expect("critical exponent has a target");
    let mut ratios = Vec::new();
    for &c in counts {
        let m = build_sphere(2, c, DistanceMode::Chordal)?;
        let k0 = assemble(&m, KernelSpec::riesz(alpha))?;
        let k1 = assemble(&m, KernelSpec::riesz(alpha + 1.0))?;
        let part = build_partition(&m, &octahedral_caps(), p)?;
        let mut r = rng(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let f = smooth_density(&m, &mut r);
            let eta = &part.etas[r.random_range(0..part.etas.len())];
            worst = worst.max(commutator_norm(&m, &k0, &k1, &f, eta, q)?.ratio);
        }
        ratios.push(worst);
    }
    let xs: Vec<f64> = counts.iter().map(|c| *c as f64).collect();
    let slope = fit_log_log(&xs, &ratios).slope;
    Ok(CommutatorTrend {
        counts: counts.to_vec(),
        ratios,
        slope,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct YoungSweep {
    pub reversed: bool,
    pub pairs: usize,
    pub holding: usize,
    /// Largest (classical) or smallest (conversed) lhs / rhs.
    pub extreme_constant: f64,
}

/// Random (g, h) pairs on the 2-torus with random admissible exponents.
/// Both inequalities are checked with constant 1.
pub fn young_sweep(pairs: usize, reversed: bool, seed: u64) -> LabResult<YoungSweep> {
    let m = build_flat_torus(2, 1.0, 20)?;
    let mut r = rng(seed);
    let mut holding = 0;
    let mut extreme = if reversed { f64::INFINITY } else { 0.0 };
    for _ in 0..pairs {
        let (a, b) = if reversed {
            let a: f64 = r.random_range(1.1..2.8);
            let b: f64 = r.random_range(-2.0..(1.0 - a - 0.05).min(-0.05));
            (a, b)
        } else {
            let a: f64 = r.random_range(0.5..1.0);
            let b: f64 = r.random_range((1.05 - a)..1.0);
            (a, b)
        };
        let (p, q, rr) = (1.0 / a, 1.0 / b, 1.0 / (a + b - 1.0));
        let g = if reversed {
            positive_density(&m, &mut r)
        } else {
            smooth_density(&m, &mut r)
        };
        let width: f64 = r.random_range(0.05..0.3);
        let power: f64 = r.random_range(0.5..3.0);
        let h = move |d: f64| {
            if reversed {
                (d + width).powf(-power)
            } else {
                (-d * d / (2.0 * width * width)).exp()
            }
        };
        let c = young_check(&m, g.values(), h, p, q, rr, reversed, 1.0)?;
        if c.holds {
            holding += 1;
        }
        extreme = if reversed {
            extreme.min(c.constant)
        } else {
            extreme.max(c.constant)
        };
    }
    Ok(YoungSweep {
        reversed,
        pairs,
        holding,
        extreme_constant: extreme,
    })
}

/// Manifolds of every kind at gradient-check size.
pub fn small_manifolds() -> LabResult<Vec<QuadratureManifold>> {
    Ok(vec![
        build_sphere(2, 120, DistanceMode::Chordal)?,
        build_sphere(2, 120, DistanceMode::Geodesic)?,
        build_flat_torus(2, 1.0, 11)?,
        build_euclidean_patch(3, 1.0, 125)?,
    ])
}
