//! File formats: manifold.json and the CSV tables.

use std::fs;
use std::path::Path;

use hls_core::optimize::ContinuationEntry;
use hls_core::{ManifoldKind, QuadratureManifold};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, LabResult};
use crate::json::{self, format_f64};

/// Serialized manifold. Distances are recomputed on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldDocument {
    pub dim: usize,
    pub kind: ManifoldKind,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Sphere radius, torus side or patch radius; 1 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

impl ManifoldDocument {
    pub fn from_manifold(m: &QuadratureManifold) -> LabResult<Self> {
        if m.kind() == ManifoldKind::Abstract {
            return Err(config_err(
                "abstract point systems have no node coordinates to serialize",
            ));
        }
        Ok(ManifoldDocument {
            dim: m.dim(),
            kind: m.kind(),
            nodes: (0..m.node_count()).map(|i| m.node(i).to_vec()).collect(),
            weights: m.weights().to_vec(),
            scale: if m.scale() == 1.0 {
                None
            } else {
                Some(m.scale())
            },
        })
    }

    pub fn into_manifold(self) -> LabResult<QuadratureManifold> {
        let ambient = self.nodes.first().map_or(0, Vec::len);
        if self.nodes.iter().any(|x| x.len() != ambient) {
            return Err(config_err("manifold nodes have inconsistent lengths"));
        }
        let flat: Vec<f64> = self.nodes.into_iter().flatten().collect();
        Ok(QuadratureManifold::from_parts(
            self.dim,
            self.kind,
            flat,
            self.weights,
            self.scale.unwrap_or(1.0),
        )?)
    }
}

pub fn write_manifold(path: &Path, m: &QuadratureManifold) -> LabResult<()> {
    let doc = ManifoldDocument::from_manifold(m)?;
    fs::write(path, json::to_string(&doc)?)?;
    Ok(())
}

pub fn read_manifold(path: &Path) -> LabResult<QuadratureManifold> {
    let text = fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    let doc: ManifoldDocument = serde_json::from_str(&text)
        .map_err(|e| config_err(format!("bad manifold file {}: {e}", path.display())))?;
    doc.into_manifold()
}

fn write_table(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> LabResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> crate::error::LabError {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e.into(),
        other => config_err(format!("csv: {other:?}")),
    }
}

pub fn write_constants_csv(path: &Path, rows: &[(usize, f64, f64)]) -> LabResult<()> {
    write_table(
        path,
        &["n", "alpha", "Y_value"],
        rows.iter()
            .map(|(n, a, y)| vec![n.to_string(), format_f64(*a), format_f64(*y)]),
    )
}

pub fn write_profile_csv(
    path: &Path,
    lambdas: &[f64],
    measures: &[f64],
    normalized: &[f64],
) -> LabResult<()> {
    write_table(
        path,
        &["lambda", "measure", "normalized"],
        lambdas
            .iter()
            .zip(measures)
            .zip(normalized)
            .map(|((l, m), v)| vec![format_f64(*l), format_f64(*m), format_f64(*v)]),
    )
}

pub fn write_trace_csv(path: &Path, entries: &[ContinuationEntry]) -> LabResult<()> {
    write_table(
        path,
        &["p", "Y", "concentration", "iterations", "converged"],
        entries.iter().map(|e| {
            vec![
                format_f64(e.p),
                format_f64(e.value),
                format_f64(e.concentration),
                e.iterations.to_string(),
                e.converged.to_string(),
            ]
        }),
    )
}
