//! Extremal values of the quotient: Euler–Lagrange fixed-point iteration
//! with a projected-gradient fallback, multistart and the subcritical
//! continuation in p.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::functional::{gradient_raw, quotient_raw, Density, QuotientSetup, Regime};
use crate::geometry::QuadratureManifold;
use crate::math::{critical_exponent, max_abs, weighted_power_sum};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Stop once the L^∞ change of the normalized iterate is below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative positivity floor (times max f) used when p < 1.
    pub floor: f64,
    pub record_history: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-9,
            max_iter: 5000,
            floor: 1e-12,
            record_history: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuotientResult {
    pub value: f64,
    /// Best iterate, normalized to ‖f‖_p = 1.
    pub extremal: Density,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// J after every accepted iterate, starting with the initial density.
    pub history: Vec<f64>,
    /// Nodes sitting on the positivity floor in the final iterate.
    pub floor_hits: usize,
    /// More than 1% of the nodes on the floor: mass is concentrating.
    pub floor_flagged: bool,
}

/// Slack for accepting a fixed-point step that loses J to roundoff.
const ACCEPT_SLACK: f64 = 1e-13;
const MAX_BACKTRACK: usize = 60;

pub fn maximize_quotient(
    s: &QuotientSetup<'_>,
    m: &QuadratureManifold,
    init: &Density,
    opts: &SolverOptions,
) -> Result<QuotientResult> {
    if s.regime() != Regime::Maximize {
        return Err(Error::RegimeMismatch(
            "maximize_quotient needs the maximize regime".into(),
        ));
    }
    solve(s, m, init, opts)
}

pub fn minimize_quotient(
    s: &QuotientSetup<'_>,
    m: &QuadratureManifold,
    init: &Density,
    opts: &SolverOptions,
) -> Result<QuotientResult> {
    if s.regime() != Regime::Minimize {
        return Err(Error::RegimeMismatch(
            "minimize_quotient needs the minimize regime".into(),
        ));
    }
    if let Some(index) = init.values().iter().position(|v| *v <= 0.0) {
        return Err(Error::NonPositiveDensity { index, p: s.p() });
    }
    solve(s, m, init, opts)
}

/// Runs the solver matching the setup's regime.
pub fn optimize(
    s: &QuotientSetup<'_>,
    m: &QuadratureManifold,
    init: &Density,
    opts: &SolverOptions,
) -> Result<QuotientResult> {
    match s.regime() {
        Regime::Maximize => maximize_quotient(s, m, init, opts),
        Regime::Minimize => minimize_quotient(s, m, init, opts),
    }
}

/// Best result over several starting densities (first wins on ties).
pub fn multistart(
    s: &QuotientSetup<'_>,
    m: &QuadratureManifold,
    inits: &[Density],
    opts: &SolverOptions,
) -> Result<QuotientResult> {
    let mut best: Option<QuotientResult> = None;
    for init in inits {
        let r = optimize(s, m, init, opts)?;
        let replace = match &best {
            None => true,
            Some(b) => match s.regime() {
                Regime::Maximize => r.value > b.value,
                Regime::Minimize => r.value < b.value,
            },
        };
        if replace {
            best = Some(r);
        }
    }
    best.ok_or(Error::InvalidParameter {
        name: "inits",
        reason: "at least one starting density is needed".into(),
    })
}

fn normalize(w: &[f64], f: &mut [f64], p: f64) -> Result<()> {
    let l = weighted_power_sum(w, f, p).powf(1.0 / p);
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::ZeroDensity);
    }
    f.iter_mut().for_each(|v| *v /= l);
    Ok(())
}

fn apply_floor(f: &mut [f64], floor: f64) {
    let cut = floor * max_abs(f);
    for v in f.iter_mut() {
        if *v < cut {
            *v = cut;
        }
    }
}

fn solve(
    s: &QuotientSetup<'_>,
    m: &QuadratureManifold,
    init: &Density,
    opts: &SolverOptions,
) -> Result<QuotientResult> {
    let k = s.kernel();
    k.check_manifold(m)?;
    init.check_manifold(m)?;
    if !(opts.tol > 0.0) || !(opts.floor >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "options",
            reason: "tol must be positive, floor nonnegative".into(),
        });
    }
    let w = m.weights();
    let p = s.p();
    let maximize = s.regime() == Regime::Maximize;
    let improves = |new: f64, old: f64, slack: f64| {
        if maximize {
            new >= old - slack * old.abs()
        } else {
            new <= old + slack * old.abs()
        }
    };
    let floored = p < 1.0;

    let mut f = init.values().to_vec();
    if floored {
        apply_floor(&mut f, opts.floor);
    }
    normalize(w, &mut f, p)?;
    let mut j = quotient_raw(k, w, &f, p)?;
    let mut history = Vec::new();
    if opts.record_history {
        history.push(j);
    }
    let expo = 1.0 / (p - 1.0);
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let kf = k.apply_weighted(w, &f);
        let mut cand: Vec<f64> = kf.iter().map(|v| v.max(0.0).powf(expo)).collect();
        if floored {
            apply_floor(&mut cand, opts.floor);
        }
        let fp_ok = normalize(w, &mut cand, p).is_ok() && cand.iter().all(|v| v.is_finite());
        let fp_value = if fp_ok {
            quotient_raw(k, w, &cand, p).ok()
        } else {
            None
        };
        let fp_residual = if fp_ok {
            linf_diff(&cand, &f)
        } else {
            f64::INFINITY
        };

        let step = match fp_value {
            Some(jc) if improves(jc, j, ACCEPT_SLACK) => Some((cand, jc, fp_residual)),
            _ => gradient_step(s, w, &f, j, maximize, opts.floor),
        };
        match step {
            Some((next, jn, res)) => {
                residual = res;
                f = next;
                j = jn;
                if opts.record_history {
                    history.push(j);
                }
                if residual <= opts.tol {
                    converged = true;
                    break;
                }
            }
            None => {
                // neither step improves J: stationary up to roundoff if the
                // Euler–Lagrange map barely moves the iterate
                residual = fp_residual;
                converged = residual <= opts.tol;
                break;
            }
        }
    }

    let cut = opts.floor * max_abs(&f);
    let floor_hits = if floored {
        f.iter().filter(|v| **v <= cut * (1.0 + 1e-12)).count()
    } else {
        0
    };
    let floor_flagged = floor_hits * 100 > f.len();
    Ok(QuotientResult {
        value: j,
        extremal: Density::from_raw(f, m.id()),
        residual,
        iterations,
        converged,
        history,
        floor_hits,
        floor_flagged,
    })
}

fn linf_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Projected gradient step with backtracking; returns the first candidate
/// that strictly improves J.
fn gradient_step(
    s: &QuotientSetup<'_>,
    w: &[f64],
    f: &[f64],
    j: f64,
    maximize: bool,
    floor: f64,
) -> Option<(Vec<f64>, f64, f64)> {
    let p = s.p();
    let (grad, _) = gradient_raw(s.kernel(), w, f, p).ok()?;
    let gmax = max_abs(&grad);
    if !(gmax > 0.0 && gmax.is_finite()) {
        return None;
    }
    let sign = if maximize { 1.0 } else { -1.0 };
    let mut t = 0.1 * max_abs(f) / gmax;
    for _ in 0..MAX_BACKTRACK {
        let mut cand: Vec<f64> = f
            .iter()
            .zip(&grad)
            .map(|(v, g)| (v + sign * t * g).max(0.0))
            .collect();
        if p < 1.0 {
            apply_floor(&mut cand, floor);
        }
        if normalize(w, &mut cand, p).is_ok() {
            if let Ok(jc) = quotient_raw(s.kernel(), w, &cand, p) {
                let better = if maximize { jc > j } else { jc < j };
                if better {
                    let res = linf_diff(&cand, f);
                    return Some((cand, jc, res));
                }
            }
        }
        t *= 0.5;
    }
    None
}

/// Fraction of p-mass in the best closed ball of radius `r` centred at a
/// node, with the centre index (lowest index on ties).
pub fn concentration_center(
    f: &Density,
    m: &QuadratureManifold,
    r: f64,
    p: f64,
) -> Result<(f64, usize)> {
    f.check_manifold(m)?;
    if !(r > 0.0) {
        return Err(Error::InvalidParameter {
            name: "r",
            reason: "must be positive".into(),
        });
    }
    let w = m.weights();
    let mass: Vec<f64> = w
        .iter()
        .zip(f.values())
        .map(|(w, v)| w * v.powf(p))
        .collect();
    let total: f64 = mass.iter().sum();
    if total == 0.0 {
        return Err(Error::ZeroDensity);
    }
    let mut best = (0.0, 0);
    for k in 0..m.node_count() {
        let row = m.distance_row(k);
        let inside: f64 = row
            .iter()
            .zip(&mass)
            .filter(|(d, _)| **d <= r)
            .map(|(_, q)| q)
            .sum();
        if inside > best.0 {
            best = (inside, k);
        }
    }
    Ok(((best.0 / total).min(1.0), best.1))
}

pub fn concentration_metric(f: &Density, m: &QuadratureManifold, r: f64, p: f64) -> Result<f64> {
    concentration_center(f, m, r, p).map(|c| c.0)
}

/// Bubble (ε/(ε² + d(x, x_c)²))^{(n+α)/2} centred at a node.
pub fn bubble_init(
    m: &QuadratureManifold,
    center: usize,
    epsilon: f64,
    alpha: f64,
) -> Result<Density> {
    if center >= m.node_count() {
        return Err(Error::InvalidParameter {
            name: "center",
            reason: format!("node {center} out of range"),
        });
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            reason: "must be positive".into(),
        });
    }
    let e = (m.dim() as f64 + alpha) / 2.0;
    let values = m
        .distance_row(center)
        .iter()
        .map(|d| (epsilon / (epsilon * epsilon + d * d)).powf(e))
        .collect();
    Density::new(m, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationOptions {
    pub solver: SolverOptions,
    /// Ball radius for the concentration metric.
    pub radius: f64,
    /// Start each p from the previous extremal instead of the initial density.
    pub warm_start: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationEntry {
    pub p: f64,
    pub value: f64,
    pub concentration: f64,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    pub floor_flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationTrace {
    pub entries: Vec<ContinuationEntry>,
    pub critical_p: f64,
    /// Extremal of the last entry.
    pub last_extremal: Option<Density>,
}

/// Solves the minimize problem along an ascending subcritical p list.
pub fn continuation(
    base: &QuotientSetup<'_>,
    m: &QuadratureManifold,
    p_list: &[f64],
    init: &Density,
    opts: &ContinuationOptions,
) -> Result<ContinuationTrace> {
    if base.regime() != Regime::Minimize {
        return Err(Error::RegimeMismatch(
            "continuation runs in the minimize regime".into(),
        ));
    }
    let k = base.kernel();
    let pc = critical_exponent(k.dim(), k.alpha());
    if p_list.is_empty() {
        return Err(Error::InvalidParameter {
            name: "p_list",
            reason: "empty".into(),
        });
    }
    for (i, p) in p_list.iter().enumerate() {
        if !(*p > 0.0 && *p < pc) {
            return Err(Error::ExponentRelation(format!("p = {p} not in (0, {pc})")));
        }
        if i > 0 && *p <= p_list[i - 1] {
            return Err(Error::InvalidParameter {
                name: "p_list",
                reason: "must be strictly increasing".into(),
            });
        }
    }
    let mut entries = Vec::with_capacity(p_list.len());
    let mut current = init.clone();
    let mut last = None;
    for &p in p_list {
        let setup = base.with_p(p)?;
        let start = if opts.warm_start { &current } else { init };
        let r = minimize_quotient(&setup, m, start, &opts.solver)?;
        let concentration = concentration_metric(&r.extremal, m, opts.radius, p)?;
        entries.push(ContinuationEntry {
            p,
            value: r.value,
            concentration,
            iterations: r.iterations,
            converged: r.converged,
            residual: r.residual,
            floor_flagged: r.floor_flagged,
        });
        current = r.extremal.clone();
        last = Some(r.extremal);
    }
    Ok(ContinuationTrace {
        entries,
        critical_p: pc,
        last_extremal: last,
    })
}
