//! Named verification suites run by `hlslab verify`.

use std::path::Path;

use hls_core::analytic::{bubble_pmass, funk_hecke_constant, sharp_constant_sphere};
use hls_core::diagnostics::{build_partition, commutator_norm, Cap};
use hls_core::functional::bilinear;
use hls_core::geometry::build_sphere;
use hls_core::kernel::assemble;
use hls_core::math::{critical_exponent, hls_target_exponent};
use hls_core::optimize::maximize_quotient;
use hls_core::{
    Density, DistanceMode, KernelMatrix, KernelSpec, QuadratureManifold, QuotientSetup, Regime,
    SolverOptions,
};
use serde::Serialize;

use crate::error::{config_err, LabResult};
use crate::io::write_profile_csv;
use crate::sampling::{rng, smooth_density};
use crate::studies;

pub const SUITES: [&str; 5] = ["identities", "weaktype", "epsilon", "young", "bubbles"];
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    /// "<=", ">=", "in" (value within [threshold, upper]).
    pub relation: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            passed: value <= threshold,
            value,
            threshold,
            relation: "<=",
            upper: None,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            passed: value >= threshold,
            value,
            threshold,
            relation: ">=",
            upper: None,
        }
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            name: name.into(),
            passed: value >= lo && value <= hi,
            value,
            threshold: lo,
            relation: "in",
            upper: Some(hi),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

/// Runs a suite; `out` receives any CSV side outputs.
pub fn run_suite(name: &str, seed: u64, out: Option<&Path>) -> LabResult<SuiteReport> {
    let checks = match name {
        "identities" => identities(seed)?,
        "weaktype" => weaktype(seed, out)?,
        "epsilon" => epsilon(seed)?,
        "young" => young(seed)?,
        "bubbles" => bubbles()?,
        other => {
            return Err(config_err(format!(
                "unknown suite '{other}' (expected one of {})",
                SUITES.join(", ")
            )))
        }
    };
    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport {
        suite: name.to_string(),
        seed,
        passed,
        checks,
    })
}

fn identities(seed: u64) -> LabResult<Vec<Check>> {
    let mut checks = Vec::new();
    let mut worst: f64 = 0.0;
    for (n, alpha) in [(1, 0.5), (1, 2.0), (2, 1.0), (3, 1.0), (3, 4.0), (4, 2.5)] {
        let y = sharp_constant_sphere(n, alpha)?.value;
        let via_b = funk_hecke_constant(n, alpha)? * bubble_pmass(n).powf(-alpha / n as f64);
        worst = worst.max((y - via_b).abs() / y);
    }
    checks.push(Check::at_most(
        "sharp constant equals B times bubble mass power",
        worst,
        1e-13,
    ));

    let circle_c = build_sphere(1, 512, DistanceMode::Chordal)?;
    let circle_g = build_sphere(1, 512, DistanceMode::Geodesic)?;
    for (label, m, spec) in [
        ("riesz chordal a=0.5", &circle_c, KernelSpec::riesz(0.5)),
        ("riesz geodesic a=2", &circle_g, KernelSpec::riesz(2.0)),
        (
            "green-sphere a=0.5",
            &circle_g,
            KernelSpec::green_sphere(0.5),
        ),
    ] {
        checks.push(Check::at_most(
            format!("S1 constant spread, {label}"),
            studies::constant_spread(m, spec)?,
            1e-6,
        ));
    }

    let s2 = build_sphere(2, 200, DistanceMode::Chordal)?;
    let k_s2 = assemble(&s2, KernelSpec::riesz(1.0))?;
    let k_s1 = assemble(&circle_c, KernelSpec::riesz(2.0))?;
    checks.push(Check::at_most(
        "homogeneity S2 a=1",
        studies::homogeneity_defect(&s2, &k_s2, 5, seed)?,
        1e-12,
    ));
    checks.push(Check::at_most(
        "homogeneity S1 a=2",
        studies::homogeneity_defect(&circle_c, &k_s1, 5, seed)?,
        1e-12,
    ));
    checks.push(Check::at_most(
        "self-adjointness",
        self_adjoint_defect(&s2, &k_s2, seed)?,
        1e-12,
    ));

    let p = critical_exponent(2, 0.5);
    let part = build_partition(&s2, &studies::octahedral_caps(), p)?;
    checks.push(Check::at_most(
        "partition normalization",
        part.normalization_defect(),
        1e-10,
    ));
    let whole = build_partition(&s2, &[Cap::new(&[0.0, 0.0, 1.0], 2.5)], p)?;
    let one_dev = whole.etas[0]
        .iter()
        .map(|v| (v - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(Check::at_most("single cap gives eta = 1", one_dev, 0.0));
    let k0 = assemble(&s2, KernelSpec::riesz(0.5))?;
    let k1 = assemble(&s2, KernelSpec::riesz(1.5))?;
    let f = smooth_density(&s2, &mut rng(seed));
    let q = hls_target_exponent(2, 0.5, p).expect("critical target");
    let c = commutator_norm(&s2, &k0, &k1, &f, &vec![0.7; s2.node_count()], q)?;
    checks.push(Check::at_most(
        "commutator vanishes for constant eta",
        c.lhs,
        0.0,
    ));

    let small = build_sphere(2, 60, DistanceMode::Chordal)?;
    let k_small = assemble(&small, KernelSpec::riesz(1.0))?;
    checks.push(Check::at_most(
        "gradient vs central differences",
        studies::gradient_error(&small, &k_small, 4.0 / 3.0, 3, seed)?,
        1e-6,
    ));

    let pair = QuadratureManifold::abstract_system(1, vec![1.0, 1.0], vec![0.0, 1.0, 1.0, 0.0])?;
    let kp = KernelMatrix::custom(&pair, 0.5, vec![0.3, 1.0, 1.0, 0.3])?;
    let s = QuotientSetup::new(&kp, 2.0, Regime::Maximize)?;
    let r = maximize_quotient(
        &s,
        &pair,
        &Density::new(&pair, vec![1.0, 0.2])?,
        &SolverOptions::default(),
    )?;
    checks.push(Check::at_most(
        "2x2 maximizer is the top eigenvalue",
        (r.value - 1.3).abs(),
        1e-10,
    ));
    Ok(checks)
}

fn self_adjoint_defect(m: &QuadratureManifold, k: &KernelMatrix, seed: u64) -> LabResult<f64> {
    let mut r = rng(seed ^ 0x5a);
    let f = smooth_density(m, &mut r);
    let g = smooth_density(m, &mut r);
    let a = bilinear(k, m, &g, &f)?;
    let b = bilinear(k, m, &f, &g)?;
    Ok((a - b).abs() / a.abs())
}

fn weaktype(seed: u64, out: Option<&Path>) -> LabResult<Vec<Check>> {
    let counts = [250, 500, 1000];
    let (classical, example) =
        studies::weak_type_trend(2, 1.0, 4.0 / 3.0, &counts, 20, seed, false)?;
    let (reversed, _) = studies::weak_type_trend(1, 2.0, 2.0 / 3.0, &counts, 20, seed, true)?;
    if let Some(dir) = out {
        write_profile_csv(
            &dir.join("profile.csv"),
            &example.lambdas,
            &example.measures,
            &example.normalized,
        )?;
    }
    Ok(vec![
        Check::within(
            "classical sup trend slope, S2 a=1",
            classical.slope,
            -0.1,
            0.1,
        ),
        Check::at_most(
            "classical sup constant finite",
            classical.sup_constants.iter().copied().fold(0.0, f64::max),
            f64::MAX,
        ),
        Check::within(
            "reversed sup trend slope, S1 a=2",
            reversed.slope,
            -0.1,
            0.1,
        ),
        Check::at_most(
            "reversed sup constant finite",
            reversed.sup_constants.iter().copied().fold(0.0, f64::max),
            f64::MAX,
        ),
    ])
}

fn epsilon(seed: u64) -> LabResult<Vec<Check>> {
    let counts = [250, 500, 1000];
    let eps = studies::epsilon_trend(0.5, 0.1, None, &counts, 20, seed)?;
    let comm = studies::commutator_trend(0.5, &counts, 20, seed)?;
    let c_max = eps.c_epsilon.iter().copied().fold(0.0, f64::max);
    Ok(vec![
        Check::at_least(
            "epsilon-level inequality holds for every sample",
            if eps.all_hold { 1.0 } else { 0.0 },
            1.0,
        ),
        Check::at_most("empirical C(eps) finite", c_max, f64::MAX),
        Check::at_most("partition normalization", eps.partition_defect, 1e-10),
        Check::within("commutator ratio trend slope", comm.slope, -0.1, 0.1),
    ])
}

fn young(seed: u64) -> LabResult<Vec<Check>> {
    let classical = studies::young_sweep(30, false, seed)?;
    let conversed = studies::young_sweep(30, true, seed)?;
    Ok(vec![
        Check::at_least(
            "classical Young pairs holding (of 30)",
            classical.holding as f64,
            30.0,
        ),
        Check::at_most(
            "largest classical constant",
            classical.extreme_constant,
            1.0,
        ),
        Check::at_least(
            "conversed Young pairs holding (of 30)",
            conversed.holding as f64,
            30.0,
        ),
        Check::at_least(
            "smallest conversed constant",
            conversed.extreme_constant,
            1.0,
        ),
    ])
}

fn bubbles() -> LabResult<Vec<Check>> {
    let mut checks = Vec::new();
    let errs = studies::funk_hecke_errors(1, 0.5, 1.0, 8.0, &[250, 1000, 4000])?;
    for w in errs.windows(2) {
        checks.push(Check::within(
            format!("bubble image error ratio N={} to {}", w[0].0, w[1].0),
            w[0].1 / w[1].1,
            1.4,
            2.6,
        ));
    }
    let ratios = [4.0, 8.0, 16.0, 32.0];
    for (n, alpha) in [(1, 0.5), (3, 1.0)] {
        let t = studies::truncation_slopes(n, alpha, &ratios)?;
        let target = -(n as f64);
        checks.push(Check::within(
            format!("truncation term I slope n={n}"),
            t.slope_one,
            1.1 * target,
            0.9 * target,
        ));
    }
    let lambdas = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    for alpha in [1.0, 4.0] {
        checks.push(Check::within(
            format!("A-term slope a={alpha}"),
            studies::a_term_slope(3, alpha, 1.0, &lambdas)?,
            0.9,
            1.1,
        ));
    }
    let opts = SolverOptions {
        record_history: false,
        ..SolverOptions::default()
    };
    for alpha in [1.0, 4.0] {
        let g = studies::mass_gap(alpha, 1.0, 1.0, [6, 8], &opts)?;
        checks.push(Check::at_least(
            format!("mass gap margin over 3x error, a={alpha} A=1"),
            g.margin - 3.0 * g.error_estimate,
            f64::MIN_POSITIVE,
        ));
    }
    Ok(checks)
}
