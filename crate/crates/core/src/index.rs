//! Exact brute-force top-k cosine retrieval over document embeddings.
//!
//! Desk-scale corpora make exact search affordable, and exactness is what the
//! oracle tests check against. Ties are broken by ascending document id so
//! results are identical across platforms.

use crate::error::{Error, Result};
use crate::types::ScoredDoc;
use std::collections::BTreeMap;

/// Cosine similarity of two equal-dimension vectors, clamped to [-1, 1].
/// Returns 0 when either vector is the zero vector.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// Cosine distance, `1 - cosine_similarity`, in [0, 2].
pub fn distance(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(1.0 - cosine_similarity(a, b)?)
}

/// Brute-force cosine index over document embeddings.
///
/// Reads (`top_k`, `max_similarity`) are safe to run concurrently; `upsert`
/// needs exclusive access.
#[derive(Debug, Clone)]
pub struct VectorIndex {
    dim: usize,
    // BTreeMap gives deterministic iteration order by id.
    entries: BTreeMap<String, Vec<f64>>,
}

impl VectorIndex {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Insert an entry, replacing the embedding when the id already exists.
    pub fn upsert(&mut self, document_id: impl Into<String>, embedding: Vec<f64>) -> Result<()> {
        if embedding.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: embedding.len(),
            });
        }
        self.entries.insert(document_id.into(), embedding);
        Ok(())
    }

    /// The `min(k, len)` entries closest to the query, sorted ascending by
    /// distance with ties broken by ascending document id. Exact.
    pub fn top_k(&self, query_embedding: &[f64], k: usize) -> Result<Vec<ScoredDoc>> {
        if k == 0 {
            return Err(Error::ZeroK);
        }
        if query_embedding.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: query_embedding.len(),
            });
        }
        let mut scored: Vec<ScoredDoc> = self
            .entries
            .iter()
            .map(|(id, emb)| {
                distance(query_embedding, emb).map(|d| ScoredDoc {
                    document_id: id.clone(),
                    distance: d,
                })
            })
            .collect::<Result<_>>()?;
        scored.sort_by(|a, b| {
            a.distance
                .total_cmp(&b.distance)
                .then_with(|| a.document_id.cmp(&b.document_id))
        });
        scored.truncate(k);
        Ok(scored)
    }

    /// Maximum cosine similarity between the candidate and any indexed entry;
    /// 0 for an empty index, so the first write into an empty region is
    /// maximally novel.
    pub fn max_similarity(&self, candidate_embedding: &[f64]) -> Result<f64> {
        let mut best = 0.0_f64;
        if self.entries.is_empty() {
            return Ok(best);
        }
        if candidate_embedding.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: candidate_embedding.len(),
            });
        }
        for emb in self.entries.values() {
            let sim = cosine_similarity(candidate_embedding, emb)?;
            if sim > best {
                best = sim;
            }
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(dim: usize, coord: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        v[coord] = 1.0;
        v
    }

    #[test]
    fn cosine_identical_unit_vectors() {
        let u = unit(4, 1);
        assert_eq!(cosine_similarity(&u, &u).unwrap(), 1.0);
    }

    #[test]
    fn cosine_antipodal() {
        let u = unit(4, 1);
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        assert_eq!(cosine_similarity(&u, &neg).unwrap(), -1.0);
    }

    #[test]
    fn cosine_orthogonal_basis() {
        assert_eq!(cosine_similarity(&unit(4, 0), &unit(4, 1)).unwrap(), 0.0);
    }

    #[test]
    fn cosine_zero_vector_is_zero() {
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn cosine_dimension_mismatch_errors() {
        assert!(cosine_similarity(&[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn distance_examples() {
        let u = unit(3, 0);
        assert_eq!(distance(&u, &u).unwrap(), 0.0);
        assert_eq!(distance(&u, &unit(3, 1)).unwrap(), 1.0);
        assert_eq!(distance(&[0.0, 0.0, 0.0], &u).unwrap(), 1.0);
    }

    #[test]
    fn top_k_exact_match_wins() {
        let mut index = VectorIndex::new(4);
        index.upsert("d1", unit(4, 0)).unwrap();
        index.upsert("d2", unit(4, 1)).unwrap();
        let hits = index.top_k(&unit(4, 0), 1).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].document_id, "d1");
        assert_eq!(hits[0].distance, 0.0);
    }

    #[test]
    fn top_k_empty_index() {
        let index = VectorIndex::new(4);
        assert!(index.top_k(&unit(4, 0), 5).unwrap().is_empty());
    }

    #[test]
    fn top_k_zero_k_errors() {
        let index = VectorIndex::new(4);
        assert!(matches!(index.top_k(&unit(4, 0), 0), Err(Error::ZeroK)));
    }

    #[test]
    fn top_k_ties_broken_by_id() {
        let mut index = VectorIndex::new(4);
        for id in ["b", "a", "c"] {
            index.upsert(id, unit(4, 2)).unwrap();
        }
        let hits = index.top_k(&unit(4, 2), 2).unwrap();
        let ids: Vec<_> = hits.iter().map(|h| h.document_id.as_str()).collect();
        assert_eq!(ids, vec!["a", "b"]);
    }

    #[test]
    fn upsert_replaces_embedding() {
        let mut index = VectorIndex::new(4);
        index.upsert("d1", unit(4, 0)).unwrap();
        index.upsert("d1", unit(4, 3)).unwrap();
        assert_eq!(index.len(), 1);
        let hits = index.top_k(&unit(4, 3), 1).unwrap();
        assert_eq!(hits[0].distance, 0.0);
    }

    #[test]
    fn max_similarity_examples() {
        let mut index = VectorIndex::new(4);
        assert_eq!(index.max_similarity(&unit(4, 0)).unwrap(), 0.0);
        index.upsert("d1", unit(4, 0)).unwrap();
        assert_eq!(index.max_similarity(&unit(4, 0)).unwrap(), 1.0);
    }

    #[test]
    fn max_similarity_three_entries_matches_brute_force() {
        let entries = [
            ("a", vec![0.6, 0.8, 0.0]),
            ("b", vec![0.0, 1.0, 0.0]),
            ("c", vec![-1.0, 0.0, 0.0]),
        ];
        let mut index = VectorIndex::new(3);
        for (id, emb) in &entries {
            index.upsert(*id, emb.clone()).unwrap();
        }
        let candidate = vec![0.8, 0.6, 0.0];
        let expected = entries
            .iter()
            .map(|(_, emb)| cosine_similarity(&candidate, emb).unwrap())
            .fold(0.0_f64, f64::max);
        assert_eq!(index.max_similarity(&candidate).unwrap(), expected);
    }
}
