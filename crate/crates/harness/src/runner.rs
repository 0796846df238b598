//! The experiment runner: a two-phase protocol over a query stream.
//!
//! Phase 1 (train) retrieves, generates and, depending on the mode, writes
//! responses back into the corpus. Phase 2 (test) is retrieval-only and
//! measures coverage. Write-back at step t is visible to retrieval at step
//! t + 1, so queries are processed strictly in file order.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use corpusgate_core::{
    acceptance, render_prompt_section, BackendConfig, BackendKind, BackendSet, Corpus, Decision,
    ExperienceStore, Query, QuerySplit, Response, RetrievedSet, Verdict, WriteOutcome,
};

use crate::config::{Mode, RunConfig};
use crate::data;
use crate::error::{Error, Result};
use crate::metrics::{self, MetricTable};
use crate::report::{self, Aggregates, BackendCalls, PerQueryRecord, RunReport, RunStatus};

/// Mutable state accumulated over a run.
struct RunState {
    corpus: Corpus,
    experiences: ExperienceStore,
    per_query: Vec<PerQueryRecord>,
    /// (citations, retrieved ids) for every generated response.
    citation_pairs: Vec<(Vec<String>, Vec<String>)>,
    /// Latencies of queries that went through generation.
    generation_latencies: Vec<f64>,
    /// Best retrieval distance per test query; infinite when nothing was
    /// retrievable.
    test_min_distances: Vec<f64>,
    train_count: usize,
    hallucinated_written: u64,
    /// False once any response lacks generator ground truth.
    ground_truth_complete: bool,
    generated_responses: usize,
}

impl RunState {
    fn new(config: &RunConfig) -> Self {
        Self {
            corpus: Corpus::new(config.backend.embedding_dim),
            experiences: ExperienceStore::new(config.thresholds),
            per_query: Vec::new(),
            citation_pairs: Vec::new(),
            generation_latencies: Vec::new(),
            test_min_distances: Vec::new(),
            train_count: 0,
            hallucinated_written: 0,
            ground_truth_complete: true,
            generated_responses: 0,
        }
    }
}

/// The backend seed is offset by the run seed so that sweeps over run seeds
/// actually vary the mock generator's choices.
fn effective_backend(config: &RunConfig) -> BackendConfig {
    let mut backend = config.backend.clone();
    backend.seed = backend.seed.wrapping_add(config.seed);
    backend
}

fn decision_label(decision: Decision) -> &'static str {
    match decision {
        Decision::Accept => "accept",
        Decision::RejectGrounding => "reject_grounding",
        Decision::RejectAttribution => "reject_attribution",
        Decision::RejectNovelty => "reject_novelty",
        Decision::RejectEmpty => "reject_empty",
        Decision::RejectCompositionCap => "reject_composition_cap",
    }
}

fn embed_one(backends: &BackendSet, text: &str) -> Result<Vec<f64>> {
    let mut vectors = backends
        .embedder
        .embed(std::slice::from_ref(&text.to_string()))?;
    if vectors.is_empty() {
        return Err(
            corpusgate_core::BackendError::Malformed("embedder returned no vector".into()).into(),
        );
    }
    Ok(vectors.remove(0))
}

/// Assemble the generation prompt: optional experience section, retrieved
/// passages, then the question.
fn build_prompt(
    question: &str,
    retrieved: &RetrievedSet,
    doc_texts: &HashMap<String, String>,
    experience_section: &str,
) -> String {
    let mut prompt = String::new();
    prompt.push_str(experience_section);
    prompt.push_str("PASSAGES:\n");
    for entry in &retrieved.entries {
        let text = doc_texts
            .get(&entry.document_id)
            .map(String::as_str)
            .unwrap_or("");
        prompt.push_str("[doc:");
        prompt.push_str(&entry.document_id);
        prompt.push_str("] ");
        prompt.push_str(text);
        prompt.push('\n');
    }
    prompt.push_str("\nQUESTION: ");
    prompt.push_str(question);
    prompt.push_str("\nCite sources with [doc:id] markers.\nANSWER:");
    prompt
}

/// Execute a single run and write its report to `config.output_dir`.
///
/// Backend failures abort the run; a partial report with status `aborted`
/// is still written before the error is returned.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let backends = BackendSet::from_config(&effective_backend(config)).map_err(Error::from)?;
    let mut state = RunState::new(config);

    let outcome = execute(config, &backends, &mut state);

    let counters = backends.counters();
    let backend_calls = BackendCalls {
        embed: counters.embed_calls(),
        nli: counters.nli_calls(),
        generate: counters.generate_calls(),
    };

    match outcome {
        Ok(()) => {
            let aggregates = compute_aggregates(config, &state)?;
            let report = RunReport {
                config: config.clone(),
                status: RunStatus::Complete,
                error: None,
                backend_calls,
                per_query: state.per_query,
                aggregates: Some(aggregates),
            };
            report.write_to(&config.output_dir)?;
            state.corpus.save(&config.output_dir.join("corpus.jsonl"))?;
            if config.mode == Mode::Bidirectional {
                state
                    .experiences
                    .save(&config.output_dir.join("experiences.jsonl"))?;
            }
            Ok(report)
        }
        Err(e) => {
            let report = RunReport {
                config: config.clone(),
                status: RunStatus::Aborted,
                error: Some(e.to_string()),
                backend_calls,
                per_query: state.per_query,
                aggregates: None,
            };
            // Best effort: the partial report must not mask the real error.
            if let Err(write_err) = report.write_to(&config.output_dir) {
                log::error!("could not write partial report: {write_err}");
            }
            Err(e)
        }
    }
}

fn execute(config: &RunConfig, backends: &BackendSet, state: &mut RunState) -> Result<()> {
    let seed_docs = data::load_seed_docs(&config.seed_corpus)?;
    state
        .corpus
        .ingest_seed(&seed_docs, backends.embedder.as_ref())?;
    log::info!(
        "seeded corpus with {} documents at dim {}",
        state.corpus.len(),
        state.corpus.dim()
    );

    let train = data::load_queries(&config.train_queries, QuerySplit::Train)?;
    let test = data::load_queries(&config.test_queries, QuerySplit::Test)?;
    state.train_count = train.len();

    let mut step: u64 = 0;
    for query in &train {
        step += 1;
        process_generation_query(config, backends, state, query, step)?;
    }
    log::info!(
        "train phase done: corpus grew by {} documents",
        state.corpus.stats().growth
    );

    for query in &test {
        if config.write_back_during_test {
            step += 1;
            process_generation_query(config, backends, state, query, step)?;
        } else {
            process_retrieval_query(config, backends, state, query)?;
        }
    }
    Ok(())
}

/// Full pipeline for one query: retrieve, generate and apply the mode's
/// write policy.
fn process_generation_query(
    config: &RunConfig,
    backends: &BackendSet,
    state: &mut RunState,
    query: &Query,
    step: u64,
) -> Result<()> {
    let timer = Instant::now();
    let query_embedding = embed_one(backends, &query.text)?;
    let hits = state.corpus.top_k(&query_embedding, config.k)?;
    let retrieved = RetrievedSet::new(query.id.clone(), hits, config.k);
    let doc_texts = state.corpus.texts_for(&retrieved)?;

    let experience_section = if config.mode == Mode::Bidirectional {
        let similar = state
            .experiences
            .retrieve_similar(&query_embedding, config.m_experiences)?;
        render_prompt_section(&similar)
    } else {
        String::new()
    };
    let prompt = build_prompt(&query.text, &retrieved, &doc_texts, &experience_section);

    let generated = backends
        .generator
        .generate(&prompt, &retrieved, &doc_texts)?;
    if generated.ground_truth_hallucinated.is_none() {
        state.ground_truth_complete = false;
    }
    state.generated_responses += 1;

    let response = Response::new(query.id.clone(), generated.text, 0.0);
    state
        .citation_pairs
        .push((response.citations.clone(), owned_ids(&retrieved)));

    let (decision, written) = match config.mode {
        Mode::Standard => ("none".to_string(), false),
        Mode::Naive => {
            let mut verdict = Verdict::unvalidated_accept();
            let outcome = state.corpus.write_back(
                &response,
                &mut verdict,
                step,
                config.alpha_max,
                backends.embedder.as_ref(),
            )?;
            (
                decision_label(verdict.decision).to_string(),
                outcome == WriteOutcome::Written,
            )
        }
        Mode::Bidirectional => {
            let candidate_embedding = embed_one(backends, &response.text)?;
            let mut verdict = acceptance::validate(
                &response,
                &retrieved,
                &doc_texts,
                &candidate_embedding,
                state.corpus.index(),
                backends.nli.as_ref(),
                &config.thresholds,
            )?;
            let outcome = state.corpus.write_back(
                &response,
                &mut verdict,
                step,
                config.alpha_max,
                backends.embedder.as_ref(),
            )?;
            state
                .experiences
                .record(&verdict, query, query_embedding.clone(), step);
            (
                decision_label(verdict.decision).to_string(),
                outcome == WriteOutcome::Written,
            )
        }
    };

    if written && generated.ground_truth_hallucinated == Some(true) {
        state.hallucinated_written += 1;
    }

    let latency_s = if config.backend.kind == BackendKind::Mock {
        0.0
    } else {
        timer.elapsed().as_secs_f64()
    };
    state.generation_latencies.push(latency_s);
    record_query(
        state, config, query, &retrieved, decision, written, latency_s,
    );
    Ok(())
}

/// Retrieval-only processing for the test phase.
fn process_retrieval_query(
    config: &RunConfig,
    backends: &BackendSet,
    state: &mut RunState,
    query: &Query,
) -> Result<()> {
    let timer = Instant::now();
    let query_embedding = embed_one(backends, &query.text)?;
    let hits = state.corpus.top_k(&query_embedding, config.k)?;
    let retrieved = RetrievedSet::new(query.id.clone(), hits, config.k);
    let latency_s = if config.backend.kind == BackendKind::Mock {
        0.0
    } else {
        timer.elapsed().as_secs_f64()
    };
    record_query(
        state,
        config,
        query,
        &retrieved,
        "retrieval_only".to_string(),
        false,
        latency_s,
    );
    Ok(())
}

fn owned_ids(retrieved: &RetrievedSet) -> Vec<String> {
    retrieved.ids().into_iter().map(str::to_string).collect()
}

fn record_query(
    state: &mut RunState,
    config: &RunConfig,
    query: &Query,
    retrieved: &RetrievedSet,
    decision: String,
    written: bool,
    latency_s: f64,
) {
    let min_distance = retrieved.min_distance();
    let covered = min_distance
        .map(|d| d < config.relevance_distance)
        .unwrap_or(false);
    if query.split == QuerySplit::Test {
        state
            .test_min_distances
            .push(min_distance.unwrap_or(f64::INFINITY));
    }
    state.per_query.push(PerQueryRecord {
        id: query.id.clone(),
        split: query.split,
        min_distance,
        covered,
        decision,
        written,
        latency_s,
    });
}

fn compute_aggregates(config: &RunConfig, state: &RunState) -> Result<Aggregates> {
    let coverage = metrics::coverage(&state.test_min_distances, config.relevance_distance)?;
    let citations = metrics::citation_f1(&state.citation_pairs);
    let stats = state.corpus.stats();
    let mean_latency_s = if state.generation_latencies.is_empty() {
        0.0
    } else {
        state.generation_latencies.iter().sum::<f64>() / state.generation_latencies.len() as f64
    };
    Ok(Aggregates {
        coverage_pct: 100.0 * coverage,
        growth: stats.growth as u64,
        citation_precision: citations.precision,
        citation_recall: citations.recall,
        citation_f1: citations.f1,
        mean_latency_s,
        composition_ratio: stats.composition_ratio,
        acceptance_rate: stats.growth as f64 / state.train_count as f64,
        hallucinated_docs_written: (state.generated_responses > 0 && state.ground_truth_complete)
            .then_some(state.hallucinated_written),
    })
}

/// Run every (mode, seed) combination and write one aggregate CSV over the
/// whole grid. Per-run reports land in `{output_dir}/{mode}-seed{seed}/`.
pub fn sweep(base: &RunConfig, modes: &[Mode], seeds: &[u64]) -> Result<Vec<RunReport>> {
    let modes: Vec<Mode> = if modes.is_empty() {
        Mode::ALL.to_vec()
    } else {
        Mode::ALL
            .iter()
            .copied()
            .filter(|m| modes.contains(m))
            .collect()
    };
    let seeds: Vec<u64> = if seeds.is_empty() {
        vec![base.seed]
    } else {
        let mut s = seeds.to_vec();
        s.sort_unstable();
        s.dedup();
        s
    };

    let mut reports = Vec::new();
    for mode in &modes {
        for seed in &seeds {
            let mut config = base.clone();
            config.mode = *mode;
            config.seed = *seed;
            config.output_dir = base.output_dir.join(format!("{mode}-seed{seed}"));
            log::info!("sweep: {mode} with seed {seed}");
            reports.push(run(&config)?);
        }
    }
    let path = write_grouped_aggregate(&base.output_dir, &reports)?;
    log::info!("sweep aggregate written to {}", path.display());
    Ok(reports)
}

/// Group reports by mode (canonical order, seeds ascending within a group),
/// aggregate each group and write `aggregate.csv` into `dir`.
///
/// Grouping and ordering are identical for a fresh sweep and for
/// re-aggregation of its directory, so the emitted bytes match.
pub fn write_grouped_aggregate(dir: &Path, reports: &[RunReport]) -> Result<PathBuf> {
    let groups = group_and_aggregate(reports)?;
    let path = dir.join("aggregate.csv");
    report::write_aggregate_csv(&path, &groups)?;
    Ok(path)
}

/// The per-mode aggregate table behind `aggregate.csv`.
pub fn group_and_aggregate(reports: &[RunReport]) -> Result<Vec<(String, MetricTable)>> {
    let mut groups = Vec::new();
    for mode in Mode::ALL {
        let mut members: Vec<&RunReport> = reports
            .iter()
            .filter(|r| r.config.mode == mode && r.aggregates.is_some())
            .collect();
        if members.is_empty() {
            continue;
        }
        members.sort_by_key(|r| r.config.seed);
        let owned: Vec<RunReport> = members.into_iter().cloned().collect();
        groups.push((mode.to_string(), metrics::aggregate_runs(&owned)?));
    }
    if groups.is_empty() {
        return Err(Error::Config("no complete runs to aggregate".into()));
    }
    Ok(groups)
}
