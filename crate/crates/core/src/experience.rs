//! Experience store: warnings and successes from past validations.
//!
//! Every verdict leaves a record keyed by the query embedding. At query time
//! the most similar past records are rendered into the prompt so the
//! generator can learn from earlier rejections without any parameter update.

use crate::acceptance::AcceptanceThresholds;
use crate::error::{Error, Result};
use crate::index::cosine_similarity;
use crate::types::{Decision, Query, Verdict};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperienceKind {
    Warning,
    Success,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperienceRecord {
    pub query_id: String,
    pub query_embedding: Vec<f64>,
    pub kind: ExperienceKind,
    pub note: String,
    pub step: u64,
}

/// Append-only log of validation outcomes with similarity retrieval.
#[derive(Debug, Clone)]
pub struct ExperienceStore {
    records: Vec<ExperienceRecord>,
    thresholds: AcceptanceThresholds,
}

/// Render the note a verdict leaves behind.
fn note_for(verdict: &Verdict, thresholds: &AcceptanceThresholds) -> (ExperienceKind, String) {
    let score = |s: Option<f64>| s.unwrap_or(0.0);
    match verdict.decision {
        Decision::Accept => (ExperienceKind::Success, "accepted".to_string()),
        Decision::RejectEmpty => (ExperienceKind::Warning, "empty response".to_string()),
        Decision::RejectGrounding => (
            ExperienceKind::Warning,
            format!(
                "grounding {:.2} < {:.2}",
                score(verdict.grounding_score),
                thresholds.grounding_min
            ),
        ),
        Decision::RejectAttribution => (
            ExperienceKind::Warning,
            format!(
                "attribution {:.2} < {:.2}",
                score(verdict.attribution_score),
                thresholds.attribution_min
            ),
        ),
        Decision::RejectNovelty => (
            ExperienceKind::Warning,
            format!(
                "novelty {:.2} < {:.2}",
                score(verdict.novelty_score),
                thresholds.novelty_min
            ),
        ),
        Decision::RejectCompositionCap => (
            ExperienceKind::Warning,
            "composition cap reached".to_string(),
        ),
    }
}

impl ExperienceStore {
    pub fn new(thresholds: AcceptanceThresholds) -> Self {
        Self {
            records: Vec::new(),
            thresholds,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[ExperienceRecord] {
        &self.records
    }

    /// Turn a verdict into a record and append it.
    pub fn record(
        &mut self,
        verdict: &Verdict,
        query: &Query,
        query_embedding: Vec<f64>,
        step: u64,
    ) -> &ExperienceRecord {
        debug_assert!(step >= 1, "steps are 1-based");
        let (kind, note) = note_for(verdict, &self.thresholds);
        self.records.push(ExperienceRecord {
            query_id: query.id.clone(),
            query_embedding,
            kind,
            note,
            step,
        });
        self.records.last().expect("just pushed")
    }

    /// The min(m, len) records most similar to the query embedding, ties
    /// broken by ascending step. Exact (full scan).
    pub fn retrieve_similar(
        &self,
        query_embedding: &[f64],
        m: usize,
    ) -> Result<Vec<ExperienceRecord>> {
        if m == 0 {
            return Err(Error::ZeroK);
        }
        let mut scored: Vec<(f64, &ExperienceRecord)> = self
            .records
            .iter()
            .map(|r| Ok((cosine_similarity(query_embedding, &r.query_embedding)?, r)))
            .collect::<Result<_>>()?;
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.step.cmp(&b.1.step)));
        Ok(scored.into_iter().take(m).map(|(_, r)| r.clone()).collect())
    }

    /// Save as JSONL, one record per line.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        for record in &self.records {
            serde_json::to_writer(&mut out, record).map_err(|e| Error::Parse {
                path: path.display().to_string(),
                line: 0,
                message: e.to_string(),
            })?;
            out.push(b'\n');
        }
        let mut file = fs::File::create(path)?;
        file.write_all(&out)?;
        Ok(())
    }

    /// Load a JSONL file written by [`save`](Self::save). Parse failures name
    /// the offending line.
    pub fn load(path: &Path, thresholds: AcceptanceThresholds) -> Result<Self> {
        let content = fs::read_to_string(path)?;
        let mut records = Vec::new();
        for (i, line) in content.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: ExperienceRecord =
                serde_json::from_str(line).map_err(|e| Error::Parse {
                    path: path.display().to_string(),
                    line: i + 1,
                    message: e.to_string(),
                })?;
            records.push(record);
        }
        Ok(Self {
            records,
            thresholds,
        })
    }
}

/// Render retrieved records as the prompt block the generator sees:
/// a warnings section, then a successes section, each one note per line.
/// No records means no block at all.
pub fn render_prompt_section(records: &[ExperienceRecord]) -> String {
    let mut warnings = String::new();
    let mut successes = String::new();
    for record in records {
        match record.kind {
            ExperienceKind::Warning => {
                warnings.push_str("- ");
                warnings.push_str(&record.note);
                warnings.push('\n');
            }
            ExperienceKind::Success => {
                successes.push_str("- ");
                successes.push_str(&record.note);
                successes.push('\n');
            }
        }
    }
    let mut out = String::new();
    if !warnings.is_empty() {
        out.push_str("PAST WARNINGS:\n");
        out.push_str(&warnings);
    }
    if !successes.is_empty() {
        out.push_str("PAST SUCCESSES:\n");
        out.push_str(&successes);
    }
    out
}
