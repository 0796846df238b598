//! Evaluation metrics: coverage, citation F1 and cross-run aggregation.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::report::{Aggregates, RunReport};

/// Fraction of queries whose best retrieval distance is strictly below the
/// threshold.
pub fn coverage(min_distances: &[f64], threshold: f64) -> Result<f64> {
    if min_distances.is_empty() {
        return Err(Error::Config(
            "coverage requires at least one distance".into(),
        ));
    }
    let hits = min_distances.iter().filter(|d| **d < threshold).count();
    Ok(hits as f64 / min_distances.len() as f64)
}

/// Macro-averaged citation precision, recall and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CitationScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Score citation quality over (citations, retrieved ids) pairs.
///
/// Per response: precision is the matched fraction of its citations (0 with
/// no citations), recall the matched fraction of its retrieved set (0 with
/// empty retrieval). Both are macro-averaged before the harmonic mean.
pub fn citation_f1(pairs: &[(Vec<String>, Vec<String>)]) -> CitationScores {
    if pairs.is_empty() {
        return CitationScores {
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
        };
    }
    let mut precision_sum = 0.0;
    let mut recall_sum = 0.0;
    for (cited, retrieved) in pairs {
        let cited: BTreeSet<&str> = cited.iter().map(String::as_str).collect();
        let retrieved: BTreeSet<&str> = retrieved.iter().map(String::as_str).collect();
        let matched = cited.intersection(&retrieved).count() as f64;
        if !cited.is_empty() {
            precision_sum += matched / cited.len() as f64;
        }
        if !retrieved.is_empty() {
            recall_sum += matched / retrieved.len() as f64;
        }
    }
    let n = pairs.len() as f64;
    let precision = precision_sum / n;
    let recall = recall_sum / n;
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    CitationScores {
        precision,
        recall,
        f1,
    }
}

/// Arithmetic mean and sample standard deviation (n − 1 in the denominator;
/// 0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    assert!(!values.is_empty(), "mean_std of an empty slice");
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn metric_values(aggregates: &Aggregates) -> Vec<(&'static str, f64)> {
    vec![
        ("acceptance_rate", aggregates.acceptance_rate),
        ("citation_f1", aggregates.citation_f1),
        ("citation_precision", aggregates.citation_precision),
        ("citation_recall", aggregates.citation_recall),
        ("composition_ratio", aggregates.composition_ratio),
        ("coverage_pct", aggregates.coverage_pct),
        ("growth", aggregates.growth as f64),
        ("mean_latency_s", aggregates.mean_latency_s),
    ]
}

/// Metric name to (mean, sample std), ordered by name.
pub type MetricTable = BTreeMap<String, (f64, f64)>;

/// Aggregate the metrics of several completed runs into (mean, std) pairs.
///
/// Aborted runs (no aggregates) are skipped; at least one complete run is
/// required. `hallucinated_docs_written` is included only when every
/// complete run reports it.
pub fn aggregate_runs(reports: &[RunReport]) -> Result<MetricTable> {
    let complete: Vec<&Aggregates> = reports
        .iter()
        .filter_map(|r| r.aggregates.as_ref())
        .collect();
    if complete.is_empty() {
        return Err(Error::Config("no complete runs to aggregate".into()));
    }
    let mut columns: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for aggregates in &complete {
        for (name, value) in metric_values(aggregates) {
            columns.entry(name.to_string()).or_default().push(value);
        }
    }
    if complete
        .iter()
        .all(|a| a.hallucinated_docs_written.is_some())
    {
        columns.insert(
            "hallucinated_docs_written".to_string(),
            complete
                .iter()
                .map(|a| a.hallucinated_docs_written.unwrap() as f64)
                .collect(),
        );
    }
    Ok(columns
        .into_iter()
        .map(|(name, values)| (name, mean_std(&values)))
        .collect())
}
