//! Command-line interface: run, sweep, report, validate-one, synth.

use std::collections::HashMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use corpusgate_core::{
    acceptance, distance, AcceptanceThresholds, BackendConfig, BackendSet, Response, RetrievedSet,
    ScoredDoc, VectorIndex,
};
use serde::Deserialize;

use crate::config::{Mode, RunConfig};
use crate::data;
use crate::error::{Error, Result};
use crate::report::RunReport;
use crate::runner;
use crate::synth::{self, SynthSpec};

#[derive(Parser, Debug)]
#[command(
    name = "corpusgate",
    version,
    about = "Retrieval experiments with validated corpus write-back"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a single experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a mode x seed grid and write one aggregate CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated modes; defaults to all three.
        #[arg(long, value_delimiter = ',')]
        modes: Vec<Mode>,
        /// Comma-separated seeds; defaults to the config's seed.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
    },
    /// Re-aggregate every report found below a directory.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Validate one response against a retrieved set and print the verdict.
    ValidateOne {
        /// JSON file: {"query_id": ..., "text": ...}.
        #[arg(long)]
        response: PathBuf,
        /// JSONL file of retrieved documents: {"id": ..., "text": ...}.
        #[arg(long)]
        retrieved: PathBuf,
        /// Optional run config supplying thresholds and backend.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Generate a synthetic dataset plus a ready-to-run config.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 60)]
        topics: usize,
        #[arg(long, default_value_t = 50)]
        train: usize,
        #[arg(long, default_value_t = 20)]
        test: usize,
        #[arg(long, default_value_t = 256)]
        dim: usize,
        #[arg(long, default_value_t = 0.3)]
        hallucination_rate: f64,
    },
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("CORPUSGATE_LOG", "error");
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .try_init();
}

/// Parse arguments, dispatch and map the outcome to an exit code: 0 on
/// success, 1 for usage and config problems, 2 for backend failures.
pub fn main_from_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config } => {
            let config = RunConfig::load(&config)?;
            let report = runner::run(&config)?;
            print_run_summary(&report);
            Ok(())
        }
        Command::Sweep {
            config,
            modes,
            seeds,
        } => {
            let base = RunConfig::load(&config)?;
            let reports = runner::sweep(&base, &modes, &seeds)?;
            println!(
                "sweep complete: {} runs -> {}",
                reports.len(),
                base.output_dir.join("aggregate.csv").display()
            );
            Ok(())
        }
        Command::Report { dir } => {
            let reports = collect_reports(&dir)?;
            let path = runner::write_grouped_aggregate(&dir, &reports)?;
            println!("aggregated {} reports -> {}", reports.len(), path.display());
            Ok(())
        }
        Command::ValidateOne {
            response,
            retrieved,
            config,
        } => validate_one(&response, &retrieved, config.as_deref()),
        Command::Synth {
            out,
            seed,
            topics,
            train,
            test,
            dim,
            hallucination_rate,
        } => {
            let spec = SynthSpec {
                seed,
                topics,
                train,
                test,
                embedding_dim: dim,
                hallucination_rate,
            };
            let path = synth::generate_dataset(&spec, &out)?;
            println!("dataset written: {}", path.display());
            Ok(())
        }
    }
}

fn print_run_summary(report: &RunReport) {
    let aggregates = report
        .aggregates
        .as_ref()
        .expect("a returned run report is complete");
    println!(
        "run complete: mode={} seed={} growth={} coverage={:.1}% -> {}",
        report.config.mode,
        report.config.seed,
        aggregates.growth,
        aggregates.coverage_pct,
        report.config.output_dir.join("report.json").display()
    );
}

/// Every `report.json` below `dir`, in deterministic path order.
pub fn collect_reports(dir: &Path) -> Result<Vec<RunReport>> {
    let mut paths: Vec<PathBuf> = walkdir::WalkDir::new(dir)
        .into_iter()
        .filter_map(|entry| entry.ok())
        .filter(|entry| entry.file_type().is_file() && entry.file_name() == "report.json")
        .map(|entry| entry.into_path())
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Config(format!(
            "no report.json found below {}",
            dir.display()
        )));
    }
    let mut reports = Vec::new();
    for path in paths {
        match RunReport::load(&path) {
            Ok(report) => reports.push(report),
            Err(e) => log::warn!("skipping unreadable report {}: {e}", path.display()),
        }
    }
    if reports.is_empty() {
        return Err(Error::Config(format!(
            "no readable reports below {}",
            dir.display()
        )));
    }
    Ok(reports)
}

#[derive(Deserialize)]
struct ResponseFile {
    #[serde(default)]
    query_id: Option<String>,
    text: String,
}

/// Validate a single response as if the supplied documents had been
/// retrieved for it, then print the verdict as JSON.
fn validate_one(
    response_path: &Path,
    retrieved_path: &Path,
    config_path: Option<&Path>,
) -> Result<()> {
    let (thresholds, backend_config) = match config_path {
        Some(p) => {
            let config = RunConfig::load(p)?;
            (config.thresholds, config.backend)
        }
        None => (AcceptanceThresholds::default(), BackendConfig::default()),
    };
    let backends = BackendSet::from_config(&backend_config).map_err(Error::from)?;

    let raw = std::fs::read_to_string(response_path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", response_path.display())))?;
    let parsed: ResponseFile = serde_json::from_str(&raw).map_err(|e| {
        Error::Config(format!(
            "invalid response file {}: {e}",
            response_path.display()
        ))
    })?;
    let response = Response::new(
        parsed.query_id.unwrap_or_else(|| "adhoc".to_string()),
        parsed.text,
        0.0,
    );

    let docs = data::load_seed_docs(retrieved_path)?;
    if docs.is_empty() {
        return Err(Error::Config(format!(
            "retrieved set {} is empty",
            retrieved_path.display()
        )));
    }

    let texts: Vec<String> = docs.iter().map(|(_, t)| t.clone()).collect();
    let embeddings = backends.embedder.embed(&texts)?;
    let candidate = backends
        .embedder
        .embed(std::slice::from_ref(&response.text))?
        .remove(0);

    let mut index = VectorIndex::new(backends.embedder.dim());
    let mut entries = Vec::new();
    let mut doc_texts = HashMap::new();
    for ((id, text), embedding) in docs.iter().zip(embeddings) {
        index.upsert(id.clone(), embedding.clone())?;
        entries.push(ScoredDoc {
            document_id: id.clone(),
            distance: distance(&candidate, &embedding)?,
        });
        doc_texts.insert(id.clone(), text.clone());
    }
    let retrieved = RetrievedSet::new(response.query_id.clone(), entries, docs.len());

    let verdict = acceptance::validate(
        &response,
        &retrieved,
        &doc_texts,
        &candidate,
        &index,
        backends.nli.as_ref(),
        &thresholds,
    )?;
    println!("{}", serde_json::to_string_pretty(&verdict)?);
    Ok(())
}
