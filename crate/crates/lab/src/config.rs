//! Experiment configuration: one JSON document per run.

use std::path::Path;

use hls_core::analytic::sharp_constant_sphere;
use hls_core::geometry::{build_euclidean_patch, build_flat_torus, build_sphere};
use hls_core::math::critical_exponent;
use hls_core::optimize::SolverOptions;
use hls_core::{DistanceMode, KernelSpec, QuadratureManifold, Regime};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, LabResult};
use crate::io::read_manifold;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub manifold: ManifoldConfig,
    pub kernel: KernelConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ManifoldChoice {
    Sphere,
    FlatTorus,
    EuclideanPatch,
    /// Load nodes and weights from `path` (a manifold.json document).
    File,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldConfig {
    pub kind: ManifoldChoice,
    #[serde(default)]
    pub n: Option<usize>,
    /// Node count. For the torus it must be a perfect n-th power.
    #[serde(rename = "N", default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub mode: Option<DistanceMode>,
    /// Patch radius.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Torus side.
    #[serde(rename = "L", default)]
    pub side: Option<f64>,
    #[serde(default)]
    pub path: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelChoice {
    #[default]
    Riesz,
    GreenSphere,
    GreenSynthetic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub alpha: f64,
    #[serde(default)]
    pub mode: KernelChoice,
    #[serde(rename = "A", default)]
    pub mass: Option<f64>,
    /// Defaults to the patch diameter.
    #[serde(default)]
    pub delta0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitChoice {
    #[default]
    Constant,
    Bubble,
    Random,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub regime: Option<Regime>,
    /// Defaults to the critical exponent.
    pub p: Option<f64>,
    pub p_list: Option<Vec<f64>>,
    pub tol: f64,
    pub max_iter: usize,
    pub init: InitChoice,
    pub bubble_epsilon: f64,
    pub bubble_center: usize,
    /// Extra random starting densities; the best result is reported.
    pub restarts: usize,
    pub seed: Option<u64>,
    /// Defaults to a quarter of the diameter.
    pub concentration_radius: Option<f64>,
    pub warm_start: bool,
    /// Continuation only: rerun every entry from the initial density too.
    pub compare_cold: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        SolverConfig {
            regime: None,
            p: None,
            p_list: None,
            tol: o.tol,
            max_iter: o.max_iter,
            init: InitChoice::Constant,
            bubble_epsilon: 0.2,
            bubble_center: 0,
            restarts: 0,
            seed: None,
            concentration_radius: None,
            warm_start: true,
            compare_cold: false,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Include the extremal density in report.json.
    pub extremal: bool,
    /// Include the objective history in report.json.
    pub history: bool,
    /// Also write manifold.json next to the report.
    pub manifold: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> LabResult<Self> {
        serde_json::from_str(text).map_err(|e| config_err(format!("cannot parse config: {e}")))
    }

    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Dimension before any manifold is built (file manifolds need `n` too).
    pub fn dim(&self) -> LabResult<usize> {
        self.manifold
            .n
            .ok_or_else(|| config_err("manifold.n is required"))
    }

    /// Regime implied by α and n, checked against an explicit `solver.regime`.
    pub fn regime(&self) -> LabResult<Regime> {
        let n = self.dim()?;
        let alpha = self.kernel.alpha;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(config_err(format!(
                "kernel.alpha must be positive, got {alpha}"
            )));
        }
        let implied = Regime::for_alpha(n, alpha)?;
        match self.solver.regime {
            Some(r) if r != implied => Err(config_err(format!(
                "regime mismatch: alpha = {alpha}, n = {n} calls for {}, config asks for {}",
                implied.as_str(),
                r.as_str()
            ))),
            _ => Ok(implied),
        }
    }

    pub fn critical_p(&self) -> LabResult<f64> {
        Ok(critical_exponent(self.dim()?, self.kernel.alpha))
    }

    /// The single exponent of a `constant` run.
    pub fn exponent(&self) -> LabResult<f64> {
        let regime = self.regime()?;
        let pc = self.critical_p()?;
        let p = self.solver.p.unwrap_or(pc);
        check_exponent(regime, p, pc)?;
        Ok(p)
    }

    pub fn p_list(&self) -> LabResult<Vec<f64>> {
        let list = self
            .solver
            .p_list
            .clone()
            .ok_or_else(|| config_err("solver.p_list is required"))?;
        if list.is_empty() {
            return Err(config_err("solver.p_list is empty"));
        }
        let pc = self.critical_p()?;
        for (i, p) in list.iter().enumerate() {
            if !(*p > 0.0 && *p < pc) {
                return Err(config_err(format!("p_list entry {p} outside (0, {pc})")));
            }
            if i > 0 && *p <= list[i - 1] {
                return Err(config_err("p_list must be strictly increasing"));
            }
        }
        Ok(list)
    }

    pub fn solver_options(&self) -> LabResult<SolverOptions> {
        let s = &self.solver;
        if !(s.tol > 0.0) {
            return Err(config_err("solver.tol must be positive"));
        }
        if s.max_iter == 0 {
            return Err(config_err("solver.max_iter must be at least 1"));
        }
        Ok(SolverOptions {
            tol: s.tol,
            max_iter: s.max_iter,
            ..SolverOptions::default()
        })
    }

    /// Effective seed: command line first, then config. Required whenever
    /// the run draws random numbers.
    pub fn seed(&self, cli: Option<u64>) -> LabResult<Option<u64>> {
        let seed = cli.or(self.solver.seed);
        let random = self.solver.init == InitChoice::Random || self.solver.restarts > 0;
        if random && seed.is_none() {
            return Err(config_err(
                "randomized runs need a seed (solver.seed or --seed)",
            ));
        }
        Ok(seed)
    }

    pub fn build_manifold(&self) -> LabResult<QuadratureManifold> {
        let mc = &self.manifold;
        let n = self.dim()?;
        let count = || mc.count.ok_or_else(|| config_err("manifold.N is required"));
        let m = match mc.kind {
            ManifoldChoice::Sphere => {
                build_sphere(n, count()?, mc.mode.unwrap_or(DistanceMode::Chordal))?
            }
            ManifoldChoice::FlatTorus => {
                let total = count()?;
                let per_axis = integer_root(total, n).ok_or_else(|| {
                    config_err(format!("torus N = {total} is not a perfect {n}-th power"))
                })?;
                build_flat_torus(n, mc.side.unwrap_or(1.0), per_axis)?
            }
            ManifoldChoice::EuclideanPatch => {
                build_euclidean_patch(n, mc.delta.unwrap_or(1.0), count()?)?
            }
            ManifoldChoice::File => {
                let path = mc
                    .path
                    .as_ref()
                    .ok_or_else(|| config_err("manifold.path is required for kind file"))?;
                let m = read_manifold(Path::new(path))?;
                if m.dim() != n {
                    return Err(config_err(format!(
                        "{path} has dimension {}, config says {n}",
                        m.dim()
                    )));
                }
                m
            }
        };
        Ok(m)
    }

    pub fn kernel_spec(&self, m: &QuadratureManifold) -> LabResult<KernelSpec> {
        let k = &self.kernel;
        let spec = match k.mode {
            KernelChoice::Riesz => KernelSpec::riesz(k.alpha),
            KernelChoice::GreenSphere => KernelSpec::green_sphere(k.alpha),
            KernelChoice::GreenSynthetic => {
                let mass = k
                    .mass
                    .ok_or_else(|| config_err("kernel.A is required for green-synthetic"))?;
                KernelSpec::green_synthetic(k.alpha, mass, k.delta0.unwrap_or_else(|| m.diameter()))
            }
        };
        if k.mode != KernelChoice::GreenSynthetic && (k.mass.is_some() || k.delta0.is_some()) {
            return Err(config_err(
                "kernel.A and kernel.delta0 only apply to green-synthetic",
            ));
        }
        spec.validate(m)?;
        Ok(spec)
    }

    /// Reference constant: the round-sphere sharp constant Y(n, α).
    pub fn reference(&self) -> LabResult<f64> {
        Ok(sharp_constant_sphere(self.dim()?, self.kernel.alpha)?.value)
    }

    /// Everything that can be checked without building the manifold.
    pub fn validate(&self) -> LabResult<()> {
        self.regime()?;
        self.solver_options()?;
        if self.solver.p.is_some() && self.solver.p_list.is_some() {
            return Err(config_err(
                "give either solver.p or solver.p_list, not both",
            ));
        }
        if self.solver.p_list.is_some() {
            self.p_list()?;
        } else {
            self.exponent()?;
        }
        if !(self.solver.bubble_epsilon > 0.0) {
            return Err(config_err("solver.bubble_epsilon must be positive"));
        }
        if let Some(r) = self.solver.concentration_radius {
            if !(r > 0.0) {
                return Err(config_err("solver.concentration_radius must be positive"));
            }
        }
        Ok(())
    }
}

fn check_exponent(regime: Regime, p: f64, pc: f64) -> LabResult<()> {
    let ok = match regime {
        Regime::Maximize => p > 1.0 && p >= pc,
        Regime::Minimize => p > 0.0 && p <= pc,
    };
    if ok {
        Ok(())
    } else {
        Err(config_err(format!(
            "p = {p} is outside the {} range (critical p = {pc})",
            regime.as_str()
        )))
    }
}

fn integer_root(total: usize, n: usize) -> Option<usize> {
    let guess = (total as f64).powf(1.0 / n as f64).round() as usize;
    (guess.saturating_sub(1)..=guess + 1).find(|m| m.checked_pow(n as u32) == Some(total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::LabError;

    fn base(alpha: f64, n: usize) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{"manifold": {{"kind": "sphere", "n": {n}, "N": 64}}, "kernel": {{"alpha": {alpha}}}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn alpha_equals_dimension_is_rejected() {
        let err = base(2.0, 2).validate().unwrap_err();
        assert!(matches!(err, LabError::Core(_)));
        assert!(err.to_string().contains("alpha equals dimension"));
    }

    #[test]
    fn regime_mismatch_is_rejected() {
        let mut c = base(1.0, 2);
        c.solver.regime = Some(Regime::Minimize);
        assert!(c
            .validate()
            .unwrap_err()
            .to_string()
            .contains("regime mismatch"));
    }

    #[test]
    fn default_p_is_critical() {
        let c = base(1.0, 2);
        assert!((c.exponent().unwrap() - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_fields_are_errors() {
        let text = r#"{"manifold": {"kind": "sphere", "n": 2, "N": 64, "radius": 2}, "kernel": {"alpha": 1}}"#;
        assert!(ExperimentConfig::from_json(text).is_err());
    }

    #[test]
    fn torus_count_must_be_a_power() {
        let text =
            r#"{"manifold": {"kind": "flat-torus", "n": 2, "N": 50}, "kernel": {"alpha": 1}}"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        assert!(c.build_manifold().is_err());
        let text =
            r#"{"manifold": {"kind": "flat-torus", "n": 2, "N": 49}, "kernel": {"alpha": 1}}"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(c.build_manifold().unwrap().node_count(), 49);
    }

    #[test]
    fn random_init_needs_seed() {
        let mut c = base(1.0, 2);
        c.solver.init = InitChoice::Random;
        assert!(c.seed(None).is_err());
        assert_eq!(c.seed(Some(3)).unwrap(), Some(3));
    }

    #[test]
    fn p_list_validation() {
        let mut c = base(2.0, 1);
        c.solver.p_list = Some(vec![0.5, 0.4]);
        assert!(c.validate().is_err());
        c.solver.p_list = Some(vec![0.4, 0.5, 0.6]);
        c.validate().unwrap();
        c.solver.p_list = Some(vec![0.4, 0.7]);
        assert!(c.validate().is_err());
    }
}
