//! Mode-level protocol invariants, checked through run reports alone:
//! which backends each mode may touch, how the corpus may grow, and that
//! the test phase never mutates state unless explicitly asked to.

use corpusgate_core::QuerySplit;
use corpusgate_harness::{config::Mode, runner, RunConfig, RunReport, SynthSpec};

const TOPICS: u64 = 12;
const TRAIN: u64 = 8;
const TEST: u64 = 5;

fn small_run(mode: Mode, write_back_during_test: bool) -> (tempfile::TempDir, RunReport) {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynthSpec {
        seed: 7,
        topics: TOPICS as usize,
        train: TRAIN as usize,
        test: TEST as usize,
        embedding_dim: 64,
        hallucination_rate: 0.25,
    };
    let config_path = corpusgate_harness::generate_dataset(&spec, dir.path()).unwrap();
    let mut config = RunConfig::load(&config_path).unwrap();
    config.mode = mode;
    config.write_back_during_test = write_back_during_test;
    let report = runner::run(&config).unwrap();
    (dir, report)
}

fn rows(report: &RunReport, split: QuerySplit) -> Vec<&corpusgate_harness::PerQueryRecord> {
    report
        .per_query
        .iter()
        .filter(|r| r.split == split)
        .collect()
}

#[test]
fn standard_mode_never_writes_and_never_scores() {
    let (_dir, report) = small_run(Mode::Standard, false);
    let aggregates = report.aggregates.as_ref().unwrap();
    assert_eq!(aggregates.growth, 0);
    assert_eq!(aggregates.composition_ratio, 0.0);
    assert_eq!(report.backend_calls.nli, 0);
    assert_eq!(report.backend_calls.generate, TRAIN);
    // One seed batch plus one embed per query, nothing else.
    assert_eq!(report.backend_calls.embed, 1 + TRAIN + TEST);
    for row in rows(&report, QuerySplit::Train) {
        assert_eq!(row.decision, "none");
        assert!(!row.written);
    }
}

#[test]
fn naive_mode_writes_everything_without_validation() {
    let (_dir, report) = small_run(Mode::Naive, false);
    let aggregates = report.aggregates.as_ref().unwrap();
    // Every response fits under the composition cap at this scale.
    assert_eq!(aggregates.growth, TRAIN);
    assert_eq!(report.backend_calls.nli, 0);
    assert_eq!(report.backend_calls.generate, TRAIN);
    // Seed batch + query embeds + one embed per written document.
    assert_eq!(report.backend_calls.embed, 1 + TRAIN + TEST + TRAIN);
    for row in rows(&report, QuerySplit::Train) {
        assert_eq!(row.decision, "accept");
        assert!(row.written);
    }
    assert_eq!(aggregates.acceptance_rate, 1.0);
}

#[test]
fn bidirectional_mode_validates_and_writes_selectively() {
    let (dir, report) = small_run(Mode::Bidirectional, false);
    let aggregates = report.aggregates.as_ref().unwrap();
    let growth = aggregates.growth;
    assert!(growth > 0 && growth < TRAIN, "growth {growth}");
    assert!(report.backend_calls.nli > 0);
    assert_eq!(report.backend_calls.generate, TRAIN);
    // Seed batch + query embeds + candidate embeds + written-doc embeds.
    assert_eq!(
        report.backend_calls.embed,
        1 + TRAIN + TEST + TRAIN + growth
    );
    let written: u64 = rows(&report, QuerySplit::Train)
        .iter()
        .filter(|r| r.written)
        .count() as u64;
    assert_eq!(written, growth);
    let expected_ratio = growth as f64 / (TOPICS + growth) as f64;
    assert!((aggregates.composition_ratio - expected_ratio).abs() < 1e-12);
    // Only the validated mode leaves an experience trail.
    assert!(dir.path().join("runs").join("experiences.jsonl").exists());
}

#[test]
fn test_phase_is_retrieval_only_by_default() {
    for mode in Mode::ALL {
        let (dir, report) = small_run(mode, false);
        for row in rows(&report, QuerySplit::Test) {
            assert_eq!(row.decision, "retrieval_only");
            assert!(!row.written);
            assert_eq!(row.latency_s, 0.0);
        }
        // The saved corpus holds exactly the seeds plus the train growth.
        let corpus = std::fs::read_to_string(dir.path().join("runs").join("corpus.jsonl")).unwrap();
        let lines = corpus.lines().filter(|l| !l.trim().is_empty()).count() as u64;
        assert_eq!(lines, TOPICS + report.aggregates.as_ref().unwrap().growth);
    }
}

#[test]
fn write_back_during_test_extends_the_stream() {
    let (_dir, baseline) = small_run(Mode::Naive, false);
    let (_dir2, extended) = small_run(Mode::Naive, true);
    let base_growth = baseline.aggregates.as_ref().unwrap().growth;
    let ext_growth = extended.aggregates.as_ref().unwrap().growth;
    assert!(ext_growth > base_growth, "{ext_growth} vs {base_growth}");
    for row in rows(&extended, QuerySplit::Test) {
        assert_ne!(row.decision, "retrieval_only");
    }
    // Step numbering keeps counting across the phase boundary, so the last
    // written document id reflects the full stream length.
    assert_eq!(extended.backend_calls.generate, TRAIN + TEST);
}
