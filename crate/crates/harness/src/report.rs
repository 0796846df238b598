//! Run reports: per-query records, aggregate metrics and file writers.

use std::path::Path;

use corpusgate_core::QuerySplit;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::Result;
use crate::metrics::MetricTable;

/// Whether a run finished or was cut short by a backend failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Complete,
    Aborted,
}

/// One row of the per-query log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerQueryRecord {
    pub id: String,
    pub split: QuerySplit,
    /// Best retrieval distance; absent when the corpus was empty.
    pub min_distance: Option<f64>,
    pub covered: bool,
    /// Acceptance decision, or a phase marker when no validation ran.
    pub decision: String,
    pub written: bool,
    pub latency_s: f64,
}

/// Total backend calls made over the whole run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendCalls {
    pub embed: u64,
    pub nli: u64,
    pub generate: u64,
}

/// Aggregate metrics over one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    /// Percentage of test queries whose best distance beat the threshold.
    pub coverage_pct: f64,
    /// Documents added to the corpus during the run.
    pub growth: u64,
    pub citation_precision: f64,
    pub citation_recall: f64,
    pub citation_f1: f64,
    pub mean_latency_s: f64,
    /// Final generated / total fraction of the corpus.
    pub composition_ratio: f64,
    /// growth / train queries processed.
    pub acceptance_rate: f64,
    /// Written documents the generator itself marked as hallucinated.
    /// Absent when the backend provides no ground truth.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hallucinated_docs_written: Option<u64>,
}

/// Full result of a single run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub status: RunStatus,
    /// The failure that aborted the run, when there was one.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub backend_calls: BackendCalls,
    pub per_query: Vec<PerQueryRecord>,
    /// Present only for complete runs.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub aggregates: Option<Aggregates>,
}

impl RunReport {
    /// Write `report.json` and `per_query.csv` into `dir`, creating it.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join("report.json"), json + "\n")?;

        let mut w = csv::Writer::from_path(dir.join("per_query.csv"))?;
        w.write_record([
            "id",
            "split",
            "min_distance",
            "covered",
            "decision",
            "written",
            "latency_s",
        ])?;
        for row in &self.per_query {
            w.write_record([
                row.id.as_str(),
                match row.split {
                    QuerySplit::Train => "train",
                    QuerySplit::Test => "test",
                },
                &row.min_distance.map(|d| d.to_string()).unwrap_or_default(),
                if row.covered { "true" } else { "false" },
                row.decision.as_str(),
                if row.written { "true" } else { "false" },
                &row.latency_s.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&raw)?)
    }
}

/// Write the aggregate CSV: one (system, metric) row per entry, means and
/// sample standard deviations.
pub fn write_aggregate_csv(path: &Path, groups: &[(String, MetricTable)]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["system", "metric", "mean", "std"])?;
    for (system, metrics) in groups {
        for (metric, (mean, std)) in metrics {
            w.write_record([system, metric, &mean.to_string(), &std.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
