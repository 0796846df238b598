//! Self-expanding retrieval-augmented generation with gated write-back.
//!
//! A standard RAG loop retrieves context and generates an answer; the corpus
//! never changes. This engine adds a backward path: every generated answer is
//! validated by a three-stage acceptance layer (grounding, attribution,
//! novelty) and, only if it passes, written back into the corpus as a new
//! retrievable document. Rejected answers still leave a trace in an
//! experience store that is injected into future prompts.
//!
//! Modules:
//! - [`types`]: documents, queries, responses, verdicts
//! - [`text`]: tokenization, sentence segmentation, citation parsing
//! - [`index`]: exact brute-force cosine retrieval
//! - [`backend`]: embedder / NLI / generator traits, mock and HTTP backends
//! - [`acceptance`]: the three-stage validation gauntlet
//! - [`experience`]: warning/success records injected into prompts
//! - [`corpus`]: seed ingestion, write-back, composition cap, persistence

pub mod acceptance;
pub mod backend;
pub mod corpus;
pub mod error;
pub mod experience;
pub mod index;
pub mod text;
pub mod types;

pub use acceptance::{
    attribution_score, grounding_score, novelty_score, validate, AcceptanceThresholds,
};
pub use backend::{
    BackendConfig, BackendKind, BackendSet, CallCounters, Embedder, GenerateStyle, GeneratedText,
    Generator, NliScorer, NliScores,
};
pub use corpus::{Corpus, CorpusEntry, CorpusStats, WriteOutcome, GENERATED_ID_PREFIX};
pub use error::{BackendError, Error, Result};
pub use experience::{render_prompt_section, ExperienceKind, ExperienceRecord, ExperienceStore};
pub use index::{cosine_similarity, distance, VectorIndex};
pub use types::{
    Decision, Document, DocumentOrigin, Query, QuerySplit, Response, RetrievedSet, ScoredDoc,
    Stage, Verdict,
};
