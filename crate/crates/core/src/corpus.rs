//! Corpus ownership: seed ingestion, validated write-back and persistence.
//!
//! The corpus only ever grows. Seed documents arrive once at ingestion;
//! generated documents enter exclusively through [`Corpus::write_back`],
//! which honors the verdict and the composition-ratio cap.

use crate::backend::Embedder;
use crate::error::{Error, Result};
use crate::index::VectorIndex;
use crate::types::{Document, DocumentOrigin, Response, RetrievedSet, ScoredDoc, Verdict};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::Path;

/// Id prefix reserved for generated documents; seed ids may not use it.
pub const GENERATED_ID_PREFIX: &str = "gen-";

/// What `write_back` did with a response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WriteOutcome {
    /// Stored and indexed as a new generated document.
    Written,
    /// Left the corpus untouched (rejected or unstorable response).
    Skipped,
    /// Accepted by validation but blocked by the composition-ratio cap.
    CapBlocked,
}

/// A stored document plus write-time bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    #[serde(flatten)]
    pub document: Document,
    /// Grounding score at write time; absent for seeds and for documents
    /// written without validation.
    pub grounding_at_write: Option<f64>,
}

/// Snapshot of corpus composition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub seed_count: usize,
    pub generated_count: usize,
    /// generated / total, 0 for an empty corpus.
    pub composition_ratio: f64,
    /// Number of documents added since ingestion (= generated_count).
    pub growth: usize,
}

/// The document collection and its retrieval index.
#[derive(Debug, Clone)]
pub struct Corpus {
    entries: Vec<CorpusEntry>,
    by_id: HashMap<String, usize>,
    index: VectorIndex,
    seed_count: usize,
    generated_count: usize,
}

impl Corpus {
    pub fn new(dim: usize) -> Self {
        Self {
            entries: Vec::new(),
            by_id: HashMap::new(),
            index: VectorIndex::new(dim),
            seed_count: 0,
            generated_count: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.index.dim()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[CorpusEntry] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.by_id.get(id).map(|&i| &self.entries[i].document)
    }

    pub fn text(&self, id: &str) -> Option<&str> {
        self.get(id).map(|d| d.text.as_str())
    }

    pub fn index(&self) -> &VectorIndex {
        &self.index
    }

    /// Exact top-k retrieval over the whole corpus.
    pub fn top_k(&self, query_embedding: &[f64], k: usize) -> Result<Vec<ScoredDoc>> {
        self.index.top_k(query_embedding, k)
    }

    /// Texts of every retrieved document, keyed by id.
    pub fn texts_for(&self, retrieved: &RetrievedSet) -> Result<HashMap<String, String>> {
        retrieved
            .entries
            .iter()
            .map(|e| {
                self.text(&e.document_id)
                    .map(|t| (e.document_id.clone(), t.to_string()))
                    .ok_or_else(|| Error::MissingDocumentText {
                        id: e.document_id.clone(),
                    })
            })
            .collect()
    }

    fn insert(&mut self, entry: CorpusEntry) -> Result<()> {
        if self.by_id.contains_key(&entry.document.id) {
            return Err(Error::DuplicateDocument {
                id: entry.document.id.clone(),
            });
        }
        self.index
            .upsert(entry.document.id.clone(), entry.document.embedding.clone())?;
        self.by_id
            .insert(entry.document.id.clone(), self.entries.len());
        if entry.document.origin == DocumentOrigin::Seed {
            self.seed_count += 1;
        } else {
            self.generated_count += 1;
        }
        self.entries.push(entry);
        Ok(())
    }

    /// Ingest the seed collection: validate ids, embed all texts in one
    /// batch, store and index. All-or-nothing: on any error the corpus is
    /// left unchanged.
    pub fn ingest_seed(
        &mut self,
        docs: &[(String, String)],
        embedder: &dyn Embedder,
    ) -> Result<()> {
        let mut batch_ids = HashSet::new();
        for (id, _) in docs {
            if id.starts_with(GENERATED_ID_PREFIX) {
                return Err(Error::ReservedIdPrefix { id: id.clone() });
            }
            if self.by_id.contains_key(id) || !batch_ids.insert(id.as_str()) {
                return Err(Error::DuplicateDocument { id: id.clone() });
            }
        }
        let texts: Vec<String> = docs.iter().map(|(_, t)| t.clone()).collect();
        let embeddings = embedder.embed(&texts)?;
        if embeddings.len() != docs.len() {
            return Err(Error::Backend(crate::error::BackendError::Malformed(
                format!(
                    "embedder returned {} vectors for {} texts",
                    embeddings.len(),
                    docs.len()
                ),
            )));
        }
        // Build every document before touching state.
        let mut staged = Vec::with_capacity(docs.len());
        for ((id, text), embedding) in docs.iter().zip(embeddings) {
            staged.push(CorpusEntry {
                document: Document::new(id, text, DocumentOrigin::Seed, embedding, 0)?,
                grounding_at_write: None,
            });
        }
        for entry in staged {
            self.insert(entry)?;
        }
        Ok(())
    }

    /// Apply the write-back operator for one validated response.
    ///
    /// Non-Accept verdicts and empty responses leave the corpus unchanged.
    /// Accepted responses that would push the composition ratio above
    /// `alpha_max` are blocked, and the verdict is amended to record that.
    pub fn write_back(
        &mut self,
        response: &Response,
        verdict: &mut Verdict,
        step: u64,
        alpha_max: f64,
        embedder: &dyn Embedder,
    ) -> Result<WriteOutcome> {
        if !verdict.decision.is_accept() {
            return Ok(WriteOutcome::Skipped);
        }
        if response.text.is_empty() {
            // An empty document would violate the corpus invariants; nothing
            // useful can be stored.
            return Ok(WriteOutcome::Skipped);
        }
        let ratio_after =
            (self.generated_count + 1) as f64 / (self.seed_count + self.generated_count + 1) as f64;
        if ratio_after > alpha_max {
            *verdict = verdict.clone().capped();
            return Ok(WriteOutcome::CapBlocked);
        }
        let id = format!("{GENERATED_ID_PREFIX}{step}");
        if self.by_id.contains_key(&id) {
            return Err(Error::DuplicateDocument { id });
        }
        let embedding = embedder
            .embed(std::slice::from_ref(&response.text))?
            .into_iter()
            .next()
            .ok_or_else(|| {
                Error::Backend(crate::error::BackendError::Malformed(
                    "embedder returned no vector".into(),
                ))
            })?;
        let document = Document::new(
            id,
            &response.text,
            DocumentOrigin::Generated,
            embedding,
            step,
        )?;
        self.insert(CorpusEntry {
            document,
            grounding_at_write: verdict.grounding_score,
        })?;
        Ok(WriteOutcome::Written)
    }

    pub fn stats(&self) -> CorpusStats {
        let total = self.seed_count + self.generated_count;
        CorpusStats {
            seed_count: self.seed_count,
            generated_count: self.generated_count,
            composition_ratio: if total == 0 {
                0.0
            } else {
                self.generated_count as f64 / total as f64
            },
            growth: self.generated_count,
        }
    }

    /// Save as JSONL, one document per line, embeddings bit-exact.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        for entry in &self.entries {
            serde_json::to_writer(&mut out, entry).map_err(|e| Error::Parse {
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

    /// Load a corpus saved by [`save`](Self::save). Errors carry the
    /// offending line number; duplicate ids are rejected.
    pub fn load(path: &Path, dim: usize) -> Result<Self> {
        let content = fs::read_to_string(path)?;
        let mut corpus = Self::new(dim);
        for (i, line) in content.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: path.display().to_string(),
                line: i + 1,
                message,
            };
            let entry: CorpusEntry =
                serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
            // Re-run constructor validation on untrusted data.
            let document = Document::new(
                &entry.document.id,
                &entry.document.text,
                entry.document.origin,
                entry.document.embedding.clone(),
                entry.document.created_at_step,
            )
            .map_err(|e| parse_err(e.to_string()))?;
            corpus.insert(CorpusEntry {
                document,
                grounding_at_write: entry.grounding_at_write,
            })?;
        }
        Ok(corpus)
    }
}
