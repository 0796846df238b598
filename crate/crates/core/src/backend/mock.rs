//! Deterministic mock backends.
//!
//! These are not placeholders: they are the reference backends for offline
//! experiments and the acceptance suite. Every output is a pure function of
//! the inputs (plus the configured seed for the generator), so whole runs
//! replay bit-for-bit.

use super::{Embedder, GeneratedText, Generator, NliScorer, NliScores};
use crate::error::{BackendError, BackendResult};
use crate::text::{segment_sentences, token_set, tokenize};
use crate::types::RetrievedSet;
use std::collections::HashMap;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a over raw bytes, 64-bit.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// SplitMix64 finalizer, used to whiten seed/id mixes.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Feature-hashing embedder. Each token lands on coordinate `hash mod dim`
/// with sign taken from the hash's top bit; the sum is L2-normalized.
pub struct MockEmbedder {
    dim: usize,
}

impl MockEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self { dim }
    }

    fn embed_one(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for token in tokenize(text) {
            let h = fnv1a64(token.as_bytes());
            let idx = (h % self.dim as u64) as usize;
            let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
            v[idx] += sign;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in &mut v {
                *x /= norm;
            }
        }
        v
    }
}

impl Embedder for MockEmbedder {
    fn embed(&self, texts: &[String]) -> BackendResult<Vec<Vec<f64>>> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }

    fn dim(&self) -> usize {
        self.dim
    }
}

/// Lexical-containment NLI: entailment is the fraction of hypothesis tokens
/// present in the premise, contradiction is always zero.
pub struct MockNli;

impl NliScorer for MockNli {
    fn entail(&self, premise: &str, hypothesis: &str) -> BackendResult<NliScores> {
        let h = token_set(hypothesis);
        let entail = if h.is_empty() {
            0.0
        } else {
            let p = token_set(premise);
            let overlap = h.intersection(&p).count();
            overlap as f64 / h.len() as f64
        };
        NliScores::new(entail, 1.0 - entail, 0.0)
    }
}

/// Fixed nonsense sentence the generator emits when it hallucinates. The
/// tokens appear in no corpus document and the cited id never exists.
pub const HALLUCINATED_TEXT: &str = "Quorvian blenthar mizzle skreeg vorpaline zyx. [doc:ghost]";

/// Template generator. Grounded responses copy the first sentence of each of
/// the top two retrieved documents and cite them; hallucinated responses emit
/// [`HALLUCINATED_TEXT`]. The choice is a seeded per-query coin flip.
pub struct MockGenerator {
    seed: u64,
    hallucination_rate: f64,
}

impl MockGenerator {
    pub fn new(seed: u64, hallucination_rate: f64) -> Self {
        assert!(
            (0.0..=1.0).contains(&hallucination_rate),
            "hallucination_rate must lie in [0, 1]"
        );
        Self {
            seed,
            hallucination_rate,
        }
    }

    /// Uniform draw in [0, 1) determined by (seed, query id).
    fn draw(&self, query_id: &str) -> f64 {
        let mixed = splitmix64(fnv1a64(query_id.as_bytes()) ^ self.seed);
        (mixed >> 11) as f64 / (1u64 << 53) as f64
    }

    fn first_sentence(text: &str) -> String {
        segment_sentences(text)
            .into_iter()
            .next()
            .unwrap_or_else(|| text.trim().to_string())
    }
}

impl Generator for MockGenerator {
    fn generate(
        &self,
        _prompt: &str,
        retrieved: &RetrievedSet,
        doc_texts: &HashMap<String, String>,
    ) -> BackendResult<GeneratedText> {
        if self.draw(&retrieved.query_id) < self.hallucination_rate {
            return Ok(GeneratedText {
                text: HALLUCINATED_TEXT.to_string(),
                ground_truth_hallucinated: Some(true),
            });
        }
        let mut parts = Vec::new();
        for entry in retrieved.entries.iter().take(2) {
            let text = doc_texts.get(&entry.document_id).ok_or_else(|| {
                BackendError::Malformed(format!(
                    "no text supplied for retrieved document {}",
                    entry.document_id
                ))
            })?;
            parts.push(format!(
                "{} [doc:{}]",
                Self::first_sentence(text),
                entry.document_id
            ));
        }
        Ok(GeneratedText {
            text: parts.join(" "),
            ground_truth_hallucinated: Some(false),
        })
    }
}
