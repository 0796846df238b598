//! Input file readers: query streams and seed corpora, both JSONL.

use std::path::Path;

use corpusgate_core::{Query, QuerySplit};
use serde::Deserialize;

use crate::error::{Error, Result};

/// One line of a query file. The `split` tag is optional; the file a query
/// comes from is authoritative.
#[derive(Debug, Deserialize)]
struct QueryLine {
    id: String,
    question: String,
    #[serde(default)]
    split: Option<QuerySplit>,
}

/// One line of a seed corpus file. Extra fields (embeddings, origin
/// metadata) are ignored: seed documents are always re-embedded by the
/// run's backend.
#[derive(Debug, Deserialize)]
struct SeedDocLine {
    id: String,
    text: String,
}

fn parse_lines<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str(line)
            .map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(parsed);
    }
    Ok(out)
}

/// Load a query file, forcing every query onto `split`. A line whose own
/// split tag disagrees is kept but logged.
pub fn load_queries(path: &Path, split: QuerySplit) -> Result<Vec<Query>> {
    let lines: Vec<QueryLine> = parse_lines(path)?;
    if lines.is_empty() {
        return Err(Error::Config(format!(
            "query file {} contains no queries",
            path.display()
        )));
    }
    Ok(lines
        .into_iter()
        .map(|line| {
            if let Some(tagged) = line.split {
                if tagged != split {
                    log::warn!(
                        "query {} is tagged {:?} but sits in the {:?} file; using the file",
                        line.id,
                        tagged,
                        split
                    );
                }
            }
            Query {
                id: line.id,
                text: line.question,
                split,
            }
        })
        .collect())
}

/// Load a seed corpus file as (id, text) pairs.
pub fn load_seed_docs(path: &Path) -> Result<Vec<(String, String)>> {
    let lines: Vec<SeedDocLine> = parse_lines(path)?;
    Ok(lines.into_iter().map(|d| (d.id, d.text)).collect())
}
