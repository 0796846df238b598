//! The three-stage acceptance layer: grounding, attribution, novelty.
//!
//! Stages run in that fixed order and short-circuit on the first failure, so
//! a rejected verdict never carries scores for stages it did not reach and
//! never spends backend calls on them.

use crate::backend::NliScorer;
use crate::error::{Error, Result};
use crate::index::VectorIndex;
use crate::text::{segment_sentences, strip_citations};
use crate::types::{Decision, Response, RetrievedSet, Stage, Verdict};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Minimum scores a response must reach at each stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcceptanceThresholds {
    pub grounding_min: f64,
    pub attribution_min: f64,
    pub novelty_min: f64,
}

impl Default for AcceptanceThresholds {
    fn default() -> Self {
        Self {
            grounding_min: 0.65,
            attribution_min: 1.0,
            novelty_min: 0.10,
        }
    }
}

impl AcceptanceThresholds {
    pub fn validate(&self) -> std::result::Result<(), String> {
        for (name, v) in [
            ("grounding_min", self.grounding_min),
            ("attribution_min", self.attribution_min),
            ("novelty_min", self.novelty_min),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        Ok(())
    }
}

/// Split a response into scoreable sentences. Citation markers are metadata,
/// not claims, so they are removed before segmentation; otherwise a marker
/// would dilute the entailment of the sentence carrying it.
fn response_sentences(text: &str) -> Vec<String> {
    segment_sentences(&strip_citations(text))
}

/// Mean over response sentences of the best entailment any retrieved text
/// gives that sentence. A response with no sentences scores 0.
pub fn grounding_score(
    response: &Response,
    retrieved_texts: &[String],
    nli: &dyn NliScorer,
) -> Result<f64> {
    if retrieved_texts.is_empty() {
        return Err(Error::EmptyRetrieved);
    }
    let sentences = response_sentences(&response.text);
    if sentences.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for sentence in &sentences {
        let mut best = 0.0_f64;
        for premise in retrieved_texts {
            let scores = nli.entail(premise, sentence)?;
            best = best.max(scores.entail);
        }
        total += best;
    }
    Ok(total / sentences.len() as f64)
}

/// Fraction of the response's citations that point at actually retrieved
/// documents. A response with no citations scores 0: it cannot demonstrate
/// attribution.
pub fn attribution_score(response: &Response, retrieved: &RetrievedSet) -> f64 {
    if response.citations.is_empty() {
        return 0.0;
    }
    let ids = retrieved.ids();
    let hits = response
        .citations
        .iter()
        .filter(|c| ids.contains(&c.as_str()))
        .count();
    hits as f64 / response.citations.len() as f64
}

/// One minus the candidate's best cosine similarity against the index,
/// clamped to [0, 1]. An empty index makes everything maximally novel.
pub fn novelty_score(candidate_embedding: &[f64], index: &VectorIndex) -> Result<f64> {
    let max_sim = index.max_similarity(candidate_embedding)?;
    Ok((1.0 - max_sim).clamp(0.0, 1.0))
}

/// Run the full gauntlet and produce a verdict.
///
/// `doc_texts` must cover every id in `retrieved`; `candidate_embedding` is
/// the embedding of the response text (the embedder is not called here).
pub fn validate(
    response: &Response,
    retrieved: &RetrievedSet,
    doc_texts: &HashMap<String, String>,
    candidate_embedding: &[f64],
    index: &VectorIndex,
    nli: &dyn NliScorer,
    thresholds: &AcceptanceThresholds,
) -> Result<Verdict> {
    if response_sentences(&response.text).is_empty() {
        return Ok(Verdict {
            grounding_score: None,
            attribution_score: None,
            novelty_score: None,
            decision: Decision::RejectEmpty,
            stage_reached: Stage::None,
        });
    }

    let retrieved_texts: Vec<String> = retrieved
        .entries
        .iter()
        .map(|e| {
            doc_texts
                .get(&e.document_id)
                .cloned()
                .ok_or_else(|| Error::MissingDocumentText {
                    id: e.document_id.clone(),
                })
        })
        .collect::<Result<_>>()?;

    let grounding = grounding_score(response, &retrieved_texts, nli)?;
    if grounding < thresholds.grounding_min {
        return Ok(Verdict {
            grounding_score: Some(grounding),
            attribution_score: None,
            novelty_score: None,
            decision: Decision::RejectGrounding,
            stage_reached: Stage::Grounding,
        });
    }

    let attribution = attribution_score(response, retrieved);
    if attribution < thresholds.attribution_min {
        return Ok(Verdict {
            grounding_score: Some(grounding),
            attribution_score: Some(attribution),
            novelty_score: None,
            decision: Decision::RejectAttribution,
            stage_reached: Stage::Attribution,
        });
    }

    let novelty = novelty_score(candidate_embedding, index)?;
    if novelty < thresholds.novelty_min {
        return Ok(Verdict {
            grounding_score: Some(grounding),
            attribution_score: Some(attribution),
            novelty_score: Some(novelty),
            decision: Decision::RejectNovelty,
            stage_reached: Stage::Novelty,
        });
    }

    Ok(Verdict {
        grounding_score: Some(grounding),
        attribution_score: Some(attribution),
        novelty_score: Some(novelty),
        decision: Decision::Accept,
        stage_reached: Stage::Novelty,
    })
}
