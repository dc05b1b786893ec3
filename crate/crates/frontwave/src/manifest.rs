use std::collections::BTreeMap;
use std::path::Path;

use frontwave_core::coupler::StageRecord;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Passed,
    /// Converged, diagnostics not requested.
    Converged,
    DiagnosticsFailed,
    NotConverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub front: f64,
    pub linear: f64,
    pub trace_deviation: f64,
}

/// Record of one `solve` run. Artifact paths are relative to the directory
/// holding the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub started: String,
    pub finished: String,
    pub config: Value,
    pub status: RunStatus,
    pub converged: bool,
    /// Diagnostics verdict, absent when diagnostics did not run.
    pub verdict: Option<bool>,
    pub error: Option<String>,
    pub c: Option<f64>,
    /// Truncation index `n` of the final stage.
    pub n_final: Option<u64>,
    pub resolved_length: f64,
    pub min_theta: Option<f64>,
    pub residuals: Option<Residuals>,
    pub continuation: Vec<StageRecord>,
    pub artifacts: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(config: Value, started: String, resolved_length: f64) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            started,
            finished: String::new(),
            config,
            status: RunStatus::NotConverged,
            converged: false,
            verdict: None,
            error: None,
            c: None,
            n_final: None,
            resolved_length,
            min_theta: None,
            residuals: None,
            continuation: Vec::new(),
            artifacts: BTreeMap::new(),
        }
    }

    /// Artifact names whose file is missing under `dir`.
    pub fn missing_artifacts(&self, dir: &Path) -> Vec<String> {
        self.artifacts
            .values()
            .filter(|p| !dir.join(p).is_file())
            .cloned()
            .collect()
    }

    pub fn total_iterations(&self) -> usize {
        self.continuation.iter().map(|r| r.iterations).sum()
    }
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339()
}
