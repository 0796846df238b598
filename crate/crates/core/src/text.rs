//! Deterministic text utilities: tokenization, sentence segmentation and
//! citation parsing.
//!
//! All functions here are pure; the same input yields the same output on
//! every platform. They are the shared vocabulary of the mock embedder,
//! the mock NLI scorer and the grounding check.

use std::collections::BTreeSet;

/// Minimum token count for a segment to count as a sentence.
const MIN_SENTENCE_TOKENS: usize = 2;

/// Lowercase a text and split it on every maximal run of non-alphanumeric
/// characters. Empty tokens are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// The distinct tokens of a text, ordered.
pub fn token_set(text: &str) -> BTreeSet<String> {
    tokenize(text).into_iter().collect()
}

/// Split a text into sentences.
///
/// A sentence ends after `.`, `!` or `?` when the terminator is followed by
/// whitespace or the end of the text. Segments are trimmed and dropped when
/// they contain fewer than two tokens, so fragments like "Yes." never count
/// as sentences.
pub fn segment_sentences(text: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();

    while let Some((i, c)) = chars.next() {
        if matches!(c, '.' | '!' | '?') {
            let boundary = match chars.peek() {
                Some((_, next)) => next.is_whitespace(),
                None => true,
            };
            if boundary {
                let end = i + c.len_utf8();
                push_sentence(&mut sentences, &text[start..end]);
                start = end;
            }
        }
    }
    push_sentence(&mut sentences, &text[start..]);
    sentences
}

fn push_sentence(out: &mut Vec<String>, segment: &str) {
    let trimmed = segment.trim();
    if tokenize(trimmed).len() >= MIN_SENTENCE_TOKENS {
        out.push(trimmed.to_string());
    }
}

/// Extract every `[doc:<id>]` citation marker from a text, where `<id>` is
/// one or more characters other than `]`. First-occurrence order is kept and
/// duplicates are dropped.
pub fn parse_citations(text: &str) -> Vec<String> {
    const OPEN: &str = "[doc:";
    let mut ids: Vec<String> = Vec::new();
    let mut rest = text;
    while let Some(pos) = rest.find(OPEN) {
        let after = &rest[pos + OPEN.len()..];
        match after.find(']') {
            Some(close) if close > 0 => {
                let id = &after[..close];
                if !ids.iter().any(|known| known == id) {
                    ids.push(id.to_string());
                }
                rest = &after[close + 1..];
            }
            Some(close) => {
                // "[doc:]" carries no id; skip past it.
                rest = &after[close + 1..];
            }
            None => break,
        }
    }
    ids
}

/// Remove every well-formed `[doc:<id>]` marker from a text.
///
/// Grounding evaluates the factual sentences of a response; citation markers
/// are routing metadata, not claims, so they are stripped before sentence
/// segmentation.
pub fn strip_citations(text: &str) -> String {
    const OPEN: &str = "[doc:";
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = rest.find(OPEN) {
        let after = &rest[pos + OPEN.len()..];
        match after.find(']') {
            Some(close) if close > 0 => {
                out.push_str(&rest[..pos]);
                rest = &after[close + 1..];
            }
            Some(close) => {
                out.push_str(&rest[..pos + OPEN.len() + close + 1]);
                rest = &after[close + 1..];
            }
            None => break,
        }
    }
    out.push_str(rest);
    out
}
