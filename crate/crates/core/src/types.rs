//! Shared domain types: documents, queries, responses, retrieval results and
//! validation verdicts.
//!
//! All types are immutable values after construction and safe to share
//! between threads.

use crate::error::{Error, Result};
use crate::text::parse_citations;
use serde::{Deserialize, Serialize};

/// Tolerance for the unit-norm check on embeddings.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// Where a corpus document came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocumentOrigin {
    /// Ingested at corpus creation.
    Seed,
    /// Written back from a validated model response.
    Generated,
}

/// A corpus entry with provenance, text and embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub origin: DocumentOrigin,
    /// Unit vector (norm 1 within [`NORM_TOLERANCE`]) or the exact zero vector.
    pub embedding: Vec<f64>,
    /// Query-step index at which the document was created; 0 for seed docs.
    pub created_at_step: u64,
}

impl Document {
    /// Build a document, enforcing the type invariants.
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        origin: DocumentOrigin,
        embedding: Vec<f64>,
        created_at_step: u64,
    ) -> Result<Self> {
        let id = id.into();
        let text = text.into();
        if id.is_empty() {
            return Err(Error::InvalidDocument {
                reason: "id must be non-empty".into(),
            });
        }
        if text.is_empty() {
            return Err(Error::InvalidDocument {
                reason: format!("document {id:?} has empty text"),
            });
        }
        if !is_unit_or_zero(&embedding) {
            return Err(Error::InvalidDocument {
                reason: format!("document {id:?} embedding is neither unit nor zero"),
            });
        }
        if origin == DocumentOrigin::Generated && created_at_step == 0 {
            return Err(Error::InvalidDocument {
                reason: format!("generated document {id:?} must have created_at_step >= 1"),
            });
        }
        Ok(Self {
            id,
            text,
            origin,
            embedding,
            created_at_step,
        })
    }
}

/// True when the vector has norm 1 within tolerance or is exactly zero.
pub fn is_unit_or_zero(v: &[f64]) -> bool {
    if v.iter().all(|&x| x == 0.0) {
        return true;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm - 1.0).abs() <= NORM_TOLERANCE
}

/// Which half of the query stream a query belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuerySplit {
    Train,
    Test,
}

/// One query from the stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub id: String,
    pub text: String,
    pub split: QuerySplit,
}

/// A generated answer. Citations are always derived from the text, never
/// set by hand, so the field can not drift out of sync.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub query_id: String,
    pub text: String,
    /// Cited document ids, parsed from `text` in first-occurrence order.
    pub citations: Vec<String>,
    /// Wall-clock seconds spent producing the response.
    pub latency_s: f64,
}

impl Response {
    pub fn new(query_id: impl Into<String>, text: impl Into<String>, latency_s: f64) -> Self {
        let text = text.into();
        let citations = parse_citations(&text);
        Self {
            query_id: query_id.into(),
            text,
            citations,
            latency_s: latency_s.max(0.0),
        }
    }
}

/// One retrieval hit: a document id and its cosine distance to the query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDoc {
    pub document_id: String,
    pub distance: f64,
}

/// Top-k retrieval result for one query, sorted ascending by distance with
/// ties broken by ascending document id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievedSet {
    pub query_id: String,
    pub entries: Vec<ScoredDoc>,
    /// Requested size; `entries` holds `min(k, corpus size)` hits.
    pub k: usize,
}

impl RetrievedSet {
    /// Build a retrieved set, sorting entries into canonical order.
    pub fn new(query_id: impl Into<String>, mut entries: Vec<ScoredDoc>, k: usize) -> Self {
        entries.sort_by(|a, b| {
            a.distance
                .total_cmp(&b.distance)
                .then_with(|| a.document_id.cmp(&b.document_id))
        });
        Self {
            query_id: query_id.into(),
            entries,
            k,
        }
    }

    /// Document ids in rank order.
    pub fn ids(&self) -> Vec<&str> {
        self.entries
            .iter()
            .map(|e| e.document_id.as_str())
            .collect()
    }

    /// Smallest distance in the set, if any.
    pub fn min_distance(&self) -> Option<f64> {
        self.entries.first().map(|e| e.distance)
    }
}

/// Outcome of the acceptance layer for one response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Accept,
    RejectGrounding,
    RejectAttribution,
    RejectNovelty,
    RejectEmpty,
    RejectCompositionCap,
}

impl Decision {
    pub fn is_accept(self) -> bool {
        self == Decision::Accept
    }
}

/// The last validation stage that was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    None,
    Grounding,
    Attribution,
    Novelty,
    CompositionCap,
}

/// Per-stage acceptance scores plus the final decision.
///
/// A score is present exactly when its stage was reached; stages after the
/// first failure are never evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub grounding_score: Option<f64>,
    pub attribution_score: Option<f64>,
    pub novelty_score: Option<f64>,
    pub decision: Decision,
    pub stage_reached: Stage,
}

impl Verdict {
    /// A verdict that accepts without running any validation stage.
    ///
    /// Used by the naive write-back baseline, which inserts every response
    /// unvalidated; all scores stay absent because no stage ever ran.
    pub fn unvalidated_accept() -> Self {
        Self {
            grounding_score: None,
            attribution_score: None,
            novelty_score: None,
            decision: Decision::Accept,
            stage_reached: Stage::None,
        }
    }

    /// Downgrade an accepting verdict after the composition cap blocked the
    /// write. Scores are kept for reporting.
    pub fn capped(mut self) -> Self {
        self.decision = Decision::RejectCompositionCap;
        self.stage_reached = Stage::CompositionCap;
        self
    }
}
