//! The `hlslab` command line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use hls_core::analytic::sharp_constant_sphere;
use hls_core::diagnostics::el_constancy;
use hls_core::kernel::assemble;
use hls_core::optimize::{
    bubble_init, concentration_center, continuation, multistart, ContinuationEntry,
    ContinuationOptions,
};
use hls_core::{Density, KernelSpec, QuadratureManifold, QuotientSetup, Regime};
use serde::Serialize;

use crate::config::{ExperimentConfig, InitChoice};
use crate::error::{config_err, LabResult};
use crate::io::{write_constants_csv, write_manifold, write_trace_csv};
use crate::json;
use crate::sampling::{rng, smooth_density};
use crate::suites::{run_suite, DEFAULT_SEED};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "hlslab",
    version,
    about = "Discrete HLS quotients, sharp constants and inequality checks"
)]
pub struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; created if missing.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for kernel assembly and matvecs.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimize the quotient at one exponent and compare with the sphere constant.
    Constant,
    /// Minimize along the config's p_list toward the critical exponent.
    Continuation,
    /// Run a verification suite: identities, weaktype, epsilon, young, bubbles.
    Verify { suite: String },
    /// Table of sphere constants Y(n, α) as constants.csv.
    Constants,
    /// Build the config's manifold and write manifold.json.
    Manifold,
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return EXIT_CONFIG;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

fn dispatch(cli: &Cli) -> LabResult<i32> {
    match &cli.command {
        Command::Constant => cmd_constant(&load(cli)?, out_dir(cli)?, cli.seed),
        Command::Continuation => cmd_continuation(&load(cli)?, out_dir(cli)?, cli.seed),
        Command::Verify { suite } => cmd_verify(suite, cli.out.as_deref(), cli.seed),
        Command::Constants => cmd_constants(cli.out.as_deref()),
        Command::Manifold => {
            let c = load(cli)?;
            let dir = out_dir(cli)?;
            write_manifold(&dir.join("manifold.json"), &c.build_manifold()?)?;
            Ok(EXIT_OK)
        }
    }
}

fn load(cli: &Cli) -> LabResult<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| config_err("--config is required"))?;
    let c = ExperimentConfig::load(path)?;
    c.validate()?;
    Ok(c)
}

fn out_dir(cli: &Cli) -> LabResult<&Path> {
    let dir = cli
        .out
        .as_deref()
        .ok_or_else(|| config_err("--out is required"))?;
    fs::create_dir_all(dir)?;
    Ok(dir)
}

fn write_report<T: Serialize>(dir: &Path, report: &T) -> LabResult<()> {
    fs::write(dir.join("report.json"), json::to_string(report)?)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct ManifoldSummary {
    kind: &'static str,
    dim: usize,
    node_count: usize,
    total_volume: f64,
    scale: f64,
}

impl ManifoldSummary {
    fn of(m: &QuadratureManifold) -> Self {
        ManifoldSummary {
            kind: m.kind().as_str(),
            dim: m.dim(),
            node_count: m.node_count(),
            total_volume: m.total_volume(),
            scale: m.scale(),
        }
    }
}

#[derive(Debug, Serialize)]
struct SolverSummary {
    value: f64,
    iterations: usize,
    residual: f64,
    converged: bool,
    floor_hits: usize,
    floor_flagged: bool,
    starts: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    extremal: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    history: Option<Vec<f64>>,
}

#[derive(Debug, Serialize)]
#[allow(non_snake_case)]
struct ConstantReport {
    command: &'static str,
    manifold: ManifoldSummary,
    kernel: KernelSpec,
    regime: Regime,
    p: f64,
    critical_p: f64,
    seed: Option<u64>,
    init: InitChoice,
    Y_estimate: f64,
    sharp_constant_reference: f64,
    relative_gap: f64,
    el_constancy: Option<f64>,
    concentration: f64,
    concentration_center: usize,
    concentration_radius: f64,
    solver: SolverSummary,
}

fn initial_density(
    c: &ExperimentConfig,
    m: &QuadratureManifold,
    seed: Option<u64>,
) -> LabResult<Density> {
    let s = &c.solver;
    Ok(match s.init {
        InitChoice::Constant => Density::constant(m, 1.0)?,
        InitChoice::Bubble => bubble_init(m, s.bubble_center, s.bubble_epsilon, c.kernel.alpha)?,
        InitChoice::Random => smooth_density(
            m,
            &mut rng(seed.expect("validated: random init has a seed")),
        ),
    })
}

fn concentration_radius(c: &ExperimentConfig, m: &QuadratureManifold) -> f64 {
    c.solver
        .concentration_radius
        .unwrap_or_else(|| m.diameter() / 4.0)
}

pub fn cmd_constant(c: &ExperimentConfig, out: &Path, cli_seed: Option<u64>) -> LabResult<i32> {
    if c.solver.p_list.is_some() {
        return Err(config_err(
            "solver.p_list belongs to the continuation command",
        ));
    }
    let seed = c.seed(cli_seed)?;
    let m = c.build_manifold()?;
    let spec = c.kernel_spec(&m)?;
    let k = assemble(&m, spec)?;
    let regime = c.regime()?;
    let p = c.exponent()?;
    let setup = QuotientSetup::new(&k, p, regime)?;
    let opts = c.solver_options()?;
    let mut inits = vec![initial_density(c, &m, seed)?];
    if c.solver.restarts > 0 {
        let mut r = rng(seed
            .expect("validated: restarts have a seed")
            .wrapping_add(1));
        inits.extend((0..c.solver.restarts).map(|_| smooth_density(&m, &mut r)));
    }
    let res = multistart(&setup, &m, &inits, &opts)?;
    let reference = c.reference()?;
    let el = if res.converged {
        Some(el_constancy(&res, &k, &m, p)?)
    } else {
        None
    };
    let radius = concentration_radius(c, &m);
    let (concentration, center) = concentration_center(&res.extremal, &m, radius, p)?;
    let report = ConstantReport {
        command: "constant",
        manifold: ManifoldSummary::of(&m),
        kernel: spec,
        regime,
        p,
        critical_p: c.critical_p()?,
        seed,
        init: c.solver.init,
        Y_estimate: res.value,
        sharp_constant_reference: reference,
        relative_gap: (res.value - reference) / reference,
        el_constancy: el,
        concentration,
        concentration_center: center,
        concentration_radius: radius,
        solver: SolverSummary {
            value: res.value,
            iterations: res.iterations,
            residual: res.residual,
            converged: res.converged,
            floor_hits: res.floor_hits,
            floor_flagged: res.floor_flagged,
            starts: inits.len(),
            extremal: c.outputs.extremal.then(|| res.extremal.values().to_vec()),
            history: c.outputs.history.then(|| res.history.clone()),
        },
    };
    write_report(out, &report)?;
    if c.outputs.manifold {
        write_manifold(&out.join("manifold.json"), &m)?;
    }
    Ok(if res.converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}

#[derive(Debug, Serialize)]
struct ContinuationReport {
    command: &'static str,
    manifold: ManifoldSummary,
    kernel: KernelSpec,
    seed: Option<u64>,
    critical_p: f64,
    sharp_constant_reference: f64,
    warm_start: bool,
    entries: Vec<ContinuationEntry>,
    all_converged: bool,
    /// Gap of the last entry to the sphere constant.
    last_relative_gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    cold_entries: Option<Vec<ContinuationEntry>>,
    /// Entries where the warm start needed fewer iterations than the cold one.
    #[serde(skip_serializing_if = "Option::is_none")]
    warm_fewer_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    last_extremal: Option<Vec<f64>>,
}

pub fn cmd_continuation(c: &ExperimentConfig, out: &Path, cli_seed: Option<u64>) -> LabResult<i32> {
    let seed = c.seed(cli_seed)?;
    if c.regime()? != Regime::Minimize {
        return Err(config_err(
            "continuation runs in the minimize regime (alpha > n)",
        ));
    }
    let p_list = c.p_list()?;
    let m = c.build_manifold()?;
    let spec = c.kernel_spec(&m)?;
    let k = assemble(&m, spec)?;
    let base = QuotientSetup::new(&k, p_list[0], Regime::Minimize)?;
    let init = initial_density(c, &m, seed)?;
    let solver = hls_core::SolverOptions {
        record_history: false,
        ..c.solver_options()?
    };
    let opts = ContinuationOptions {
        solver,
        radius: concentration_radius(c, &m),
        warm_start: c.solver.warm_start,
    };
    let trace = continuation(&base, &m, &p_list, &init, &opts)?;
    let cold = if c.solver.compare_cold {
        Some(
            continuation(
                &base,
                &m,
                &p_list,
                &init,
                &ContinuationOptions {
                    warm_start: false,
                    ..opts
                },
            )?
            .entries,
        )
    } else {
        None
    };
    let warm_fewer = cold.as_ref().map(|cold| {
        trace
            .entries
            .iter()
            .zip(cold)
            .filter(|(w, c)| w.iterations < c.iterations)
            .count()
    });
    let reference = sharp_constant_sphere(m.dim(), spec.alpha)?.value;
    let last = trace.entries.last().expect("p_list is non-empty");
    let all_converged = trace.entries.iter().all(|e| e.converged);
    write_trace_csv(&out.join("trace.csv"), &trace.entries)?;
    let report = ContinuationReport {
        command: "continuation",
        manifold: ManifoldSummary::of(&m),
        kernel: spec,
        seed,
        critical_p: trace.critical_p,
        sharp_constant_reference: reference,
        warm_start: c.solver.warm_start,
        last_relative_gap: (last.value - reference) / reference,
        entries: trace.entries.clone(),
        all_converged,
        cold_entries: cold,
        warm_fewer_iterations: warm_fewer,
        last_extremal: if c.outputs.extremal {
            trace.last_extremal.map(Density::into_values)
        } else {
            None
        },
    };
    write_report(out, &report)?;
    Ok(if all_converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}

pub fn cmd_verify(suite: &str, out: Option<&Path>, seed: Option<u64>) -> LabResult<i32> {
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
    }
    let report = run_suite(suite, seed.unwrap_or(DEFAULT_SEED), out)?;
    for c in &report.checks {
        let bound = match c.upper {
            Some(hi) => format!(
                "[{}, {}]",
                json::format_f64(c.threshold),
                json::format_f64(hi)
            ),
            None => format!("{} {}", c.relation, json::format_f64(c.threshold)),
        };
        println!(
            "{} {}: {} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            json::format_f64(c.value),
            bound
        );
    }
    if let Some(dir) = out {
        write_report(dir, &report)?;
    }
    Ok(if report.passed {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

/// (n, α) pairs of the constants table.
pub fn constant_table() -> LabResult<Vec<(usize, f64, f64)>> {
    let mut rows = Vec::new();
    for n in 1..=4usize {
        for alpha in [0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0] {
            if alpha != n as f64 {
                rows.push((n, alpha, sharp_constant_sphere(n, alpha)?.value));
            }
        }
    }
    Ok(rows)
}

pub fn cmd_constants(out: Option<&Path>) -> LabResult<i32> {
    let rows = constant_table()?;
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            write_constants_csv(&dir.join("constants.csv"), &rows)?;
        }
        None => {
            println!("n,alpha,Y_value");
            for (n, a, y) in rows {
                println!("{n},{},{}", json::format_f64(a), json::format_f64(y));
            }
        }
    }
    Ok(EXIT_OK)
}
