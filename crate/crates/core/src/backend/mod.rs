//! Pluggable embedder, generator and NLI scorer backends.
//!
//! Two implementations ship with the engine: deterministic mocks for offline
//! runs and tests ([`mock`]), and an HTTP adapter for real model servers
//! ([`http`]). Every backend handed to the engine is wrapped in a counting
//! layer so call discipline (short-circuiting, mode isolation) is observable.

pub mod http;
pub mod mock;

use crate::error::{BackendError, BackendResult};
use crate::types::RetrievedSet;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// NLI class probabilities. Always sums to 1 within 1e-6.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NliScores {
    pub entail: f64,
    pub neutral: f64,
    pub contradict: f64,
}

impl NliScores {
    /// Validate ranges and the unit-sum invariant.
    pub fn new(entail: f64, neutral: f64, contradict: f64) -> BackendResult<Self> {
        for (name, v) in [
            ("entail", entail),
            ("neutral", neutral),
            ("contradict", contradict),
        ] {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(BackendError::Malformed(format!(
                    "NLI {name} score {v} outside [0, 1]"
                )));
            }
        }
        let sum = entail + neutral + contradict;
        if (sum - 1.0).abs() > 1e-6 {
            return Err(BackendError::Malformed(format!(
                "NLI scores sum to {sum}, expected 1"
            )));
        }
        Ok(Self {
            entail,
            neutral,
            contradict,
        })
    }
}

/// Generator output. The ground-truth flag is set only by backends that know
/// whether they hallucinated (the mock), never by real model servers.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedText {
    pub text: String,
    pub ground_truth_hallucinated: Option<bool>,
}

/// Which backend family to construct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Mock,
    Http,
}

/// Wire style for the HTTP generate call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GenerateStyle {
    /// Engine-native `POST /generate` endpoint.
    #[default]
    Engine,
    /// Ollama-compatible `POST /api/generate` endpoint.
    Ollama,
}

/// Backend construction parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    pub kind: BackendKind,
    /// Base URL of the model server (Http only).
    pub base_url: String,
    /// Embedding dimension D.
    pub embedding_dim: usize,
    /// Per-request timeout in seconds (Http only).
    pub timeout_s: f64,
    /// Probability that the mock generator hallucinates (Mock only).
    pub hallucination_rate: f64,
    /// Seed for the mock generator's per-query draws (Mock only).
    pub seed: u64,
    /// Generate endpoint dialect (Http only).
    pub generate_style: GenerateStyle,
    /// Model name forwarded to Ollama-style servers.
    pub model: String,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            kind: BackendKind::Mock,
            base_url: String::new(),
            embedding_dim: 64,
            timeout_s: 30.0,
            hallucination_rate: 0.0,
            seed: 0,
            generate_style: GenerateStyle::Engine,
            model: String::new(),
        }
    }
}

impl BackendConfig {
    /// Check field invariants, returning a human-readable complaint.
    pub fn validate(&self) -> Result<(), String> {
        if self.embedding_dim == 0 {
            return Err("embedding_dim must be positive".into());
        }
        if self.timeout_s <= 0.0 || !self.timeout_s.is_finite() {
            return Err("timeout_s must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.hallucination_rate) {
            return Err("hallucination_rate must lie in [0, 1]".into());
        }
        if self.kind == BackendKind::Http && self.base_url.is_empty() {
            return Err("http backend requires a non-empty base_url".into());
        }
        Ok(())
    }
}

/// Maps texts to L2-normalized (or zero) vectors of a fixed dimension.
pub trait Embedder: Send + Sync {
    fn embed(&self, texts: &[String]) -> BackendResult<Vec<Vec<f64>>>;
    fn dim(&self) -> usize;
}

/// Scores whether a premise entails a hypothesis.
pub trait NliScorer: Send + Sync {
    fn entail(&self, premise: &str, hypothesis: &str) -> BackendResult<NliScores>;
}

/// Produces a response for a prompt given the retrieval context.
pub trait Generator: Send + Sync {
    fn generate(
        &self,
        prompt: &str,
        retrieved: &RetrievedSet,
        doc_texts: &HashMap<String, String>,
    ) -> BackendResult<GeneratedText>;
}

/// Call totals per backend role.
#[derive(Debug, Default)]
pub struct CallCounters {
    embed: AtomicU64,
    nli: AtomicU64,
    generate: AtomicU64,
}

impl CallCounters {
    pub fn embed_calls(&self) -> u64 {
        self.embed.load(Ordering::Relaxed)
    }

    pub fn nli_calls(&self) -> u64 {
        self.nli.load(Ordering::Relaxed)
    }

    pub fn generate_calls(&self) -> u64 {
        self.generate.load(Ordering::Relaxed)
    }
}

struct CountingEmbedder {
    inner: Box<dyn Embedder>,
    counters: Arc<CallCounters>,
}

impl Embedder for CountingEmbedder {
    fn embed(&self, texts: &[String]) -> BackendResult<Vec<Vec<f64>>> {
        self.counters.embed.fetch_add(1, Ordering::Relaxed);
        self.inner.embed(texts)
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }
}

struct CountingNli {
    inner: Box<dyn NliScorer>,
    counters: Arc<CallCounters>,
}

impl NliScorer for CountingNli {
    fn entail(&self, premise: &str, hypothesis: &str) -> BackendResult<NliScores> {
        self.counters.nli.fetch_add(1, Ordering::Relaxed);
        self.inner.entail(premise, hypothesis)
    }
}

struct CountingGenerator {
    inner: Box<dyn Generator>,
    counters: Arc<CallCounters>,
}

impl Generator for CountingGenerator {
    fn generate(
        &self,
        prompt: &str,
        retrieved: &RetrievedSet,
        doc_texts: &HashMap<String, String>,
    ) -> BackendResult<GeneratedText> {
        self.counters.generate.fetch_add(1, Ordering::Relaxed);
        self.inner.generate(prompt, retrieved, doc_texts)
    }
}

/// A complete, instrumented backend trio.
pub struct BackendSet {
    pub embedder: Box<dyn Embedder>,
    pub nli: Box<dyn NliScorer>,
    pub generator: Box<dyn Generator>,
    counters: Arc<CallCounters>,
}

impl BackendSet {
    /// Wrap raw backends in the counting layer.
    pub fn new(
        embedder: Box<dyn Embedder>,
        nli: Box<dyn NliScorer>,
        generator: Box<dyn Generator>,
    ) -> Self {
        let counters = Arc::new(CallCounters::default());
        Self {
            embedder: Box::new(CountingEmbedder {
                inner: embedder,
                counters: Arc::clone(&counters),
            }),
            nli: Box::new(CountingNli {
                inner: nli,
                counters: Arc::clone(&counters),
            }),
            generator: Box::new(CountingGenerator {
                inner: generator,
                counters: Arc::clone(&counters),
            }),
            counters,
        }
    }

    /// Build the trio described by a config.
    pub fn from_config(config: &BackendConfig) -> BackendResult<Self> {
        config.validate().map_err(BackendError::Malformed)?;
        match config.kind {
            BackendKind::Mock => Ok(Self::new(
                Box::new(mock::MockEmbedder::new(config.embedding_dim)),
                Box::new(mock::MockNli),
                Box::new(mock::MockGenerator::new(
                    config.seed,
                    config.hallucination_rate,
                )),
            )),
            BackendKind::Http => {
                let backend = Arc::new(http::HttpBackend::new(config)?);
                Ok(Self::new(
                    Box::new(http::SharedHttp(Arc::clone(&backend))),
                    Box::new(http::SharedHttp(Arc::clone(&backend))),
                    Box::new(http::SharedHttp(backend)),
                ))
            }
        }
    }

    /// Convenience mock trio for tests.
    pub fn mock(dim: usize, seed: u64, hallucination_rate: f64) -> Self {
        Self::new(
            Box::new(mock::MockEmbedder::new(dim)),
            Box::new(mock::MockNli),
            Box::new(mock::MockGenerator::new(seed, hallucination_rate)),
        )
    }

    pub fn counters(&self) -> Arc<CallCounters> {
        Arc::clone(&self.counters)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nli_scores_enforce_unit_sum() {
        assert!(NliScores::new(0.5, 0.5, 0.0).is_ok());
        assert!(NliScores::new(0.5, 0.2, 0.0).is_err());
        assert!(NliScores::new(1.2, -0.2, 0.0).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = BackendConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.kind = BackendKind::Http;
        assert!(cfg.validate().is_err());
        cfg.base_url = "http://localhost:1".into();
        assert!(cfg.validate().is_ok());
        cfg.hallucination_rate = 1.5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn counters_tick_through_the_set() {
        let set = BackendSet::mock(8, 1, 0.0);
        assert_eq!(set.counters().embed_calls(), 0);
        set.embedder.embed(&["hi there".into()]).unwrap();
        set.nli.entail("a b", "a").unwrap();
        let counters = set.counters();
        assert_eq!(counters.embed_calls(), 1);
        assert_eq!(counters.nli_calls(), 1);
        assert_eq!(counters.generate_calls(), 0);
    }
}
