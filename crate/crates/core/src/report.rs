//! Machine-readable run reports (JSON object per run, or CSV with one row
//! per run and the same key names as the JSON fields).

use serde::{Deserialize, Serialize};

use crate::dataset::format_real;
use crate::distance::{DistanceKind, DistanceParams};
use crate::error::{Error, Result};
use crate::metrics::Scores;

/// Distance backend used for a run, with its construction parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceDescriptor {
    pub kind: DistanceKind,
    #[serde(flatten)]
    pub params: DistanceParams,
}

impl DistanceDescriptor {
    /// Compact form used in CSV cells and run ids, e.g. `knn(k_neighbors=10)`.
    pub fn compact(&self) -> String {
        let p = &self.params;
        let mut parts = Vec::new();
        if let Some(k) = p.k_neighbors {
            parts.push(format!("k_neighbors={k}"));
        }
        if let Some(s) = p.sigma_fill {
            parts.push(format!("sigma_fill={}", format_real(s)));
        }
        if let Some(o) = p.omega {
            parts.push(format!("omega={}", format_real(o)));
        }
        if let Some(w) = p.kernel_width {
            parts.push(format!("kernel_width={}", format_real(w)));
        }
        if parts.is_empty() {
            self.kind.to_string()
        } else {
            format!("{}({})", self.kind, parts.join(";"))
        }
    }
}

/// One clustering run. Metric fields are present iff ground-truth labels
/// were supplied; `error` is present iff the run failed, in which case
/// `objective_final` is null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub run_id: String,
    /// `fkmwc`, `kmeans` or `fcm`.
    pub method: String,
    pub dataset: String,
    pub distance_kind: DistanceDescriptor,
    pub k: usize,
    /// Regularization weight; null for the baselines, which have none.
    pub lambda: Option<f64>,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    pub objective_final: Option<f64>,
    /// `(iteration, objective)` pairs, included on request.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective_trace: Option<Vec<(usize, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nmi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purity_majority: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purity_pairs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub wall_time_ms: u64,
}

/// Column order of the CSV variant.
pub const REPORT_FIELDS: [&str; 17] = [
    "run_id",
    "method",
    "dataset",
    "distance_kind",
    "k",
    "lambda",
    "seed",
    "iterations",
    "converged",
    "objective_final",
    "objective_trace",
    "acc",
    "nmi",
    "purity_majority",
    "purity_pairs",
    "error",
    "wall_time_ms",
];

impl ClusterReport {
    pub fn make_run_id(method: &str, distance: &DistanceDescriptor, k: usize, lambda: Option<f64>, seed: u64) -> String {
        let lambda = lambda.map_or_else(|| "none".to_string(), format_real);
        format!("{method}-{}-k{k}-lambda{lambda}-seed{seed}", distance.kind)
    }

    pub fn set_scores(&mut self, scores: Scores) {
        self.acc = Some(scores.acc);
        self.nmi = Some(scores.nmi);
        self.purity_majority = Some(scores.purity_majority);
        self.purity_pairs = Some(scores.purity_pairs);
    }

    fn csv_row(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(format_real).unwrap_or_default();
        vec![
            self.run_id.clone(),
            self.method.clone(),
            self.dataset.clone(),
            self.distance_kind.compact(),
            self.k.to_string(),
            opt(self.lambda),
            self.seed.to_string(),
            self.iterations.to_string(),
            self.converged.to_string(),
            opt(self.objective_final),
            self.objective_trace
                .as_ref()
                .map(|t| {
                    t.iter()
                        .map(|(i, v)| format!("{i}:{}", format_real(*v)))
                        .collect::<Vec<_>>()
                        .join(";")
                })
                .unwrap_or_default(),
            opt(self.acc),
            opt(self.nmi),
            opt(self.purity_majority),
            opt(self.purity_pairs),
            self.error.clone().unwrap_or_default(),
            self.wall_time_ms.to_string(),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Report(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn render_one(report: &ClusterReport, format: Format) -> Result<String> {
    match format {
        Format::Json => json(report),
        Format::Csv => render_many(std::slice::from_ref(report), format),
    }
}

pub fn render_many(reports: &[ClusterReport], format: Format) -> Result<String> {
    match format {
        Format::Json => json(&reports),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(REPORT_FIELDS).map_err(|e| Error::Report(e.to_string()))?;
            for r in reports {
                w.write_record(r.csv_row()).map_err(|e| Error::Report(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Report(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::Report(e.to_string()))
        }
    }
}
