//! Run configuration: one JSON document per experiment.

use std::fmt;
use std::path::{Path, PathBuf};

use corpusgate_core::{AcceptanceThresholds, BackendConfig};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The three system modes compared by the evaluation protocol.
#[derive(
    Debug,
    Clone,
    Copy,
    PartialEq,
    Eq,
    PartialOrd,
    Ord,
    Hash,
    Serialize,
    Deserialize,
    clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Retrieval-augmented generation with a frozen corpus.
    Standard,
    /// Every response is written back, no validation.
    Naive,
    /// Responses are validated and only accepted ones are written back.
    Bidirectional,
}

impl Mode {
    /// All modes in canonical comparison order.
    pub const ALL: [Mode; 3] = [Mode::Standard, Mode::Naive, Mode::Bidirectional];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Standard => "standard",
            Mode::Naive => "naive",
            Mode::Bidirectional => "bidirectional",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything a single run needs. Loaded from a JSON file whose relative
/// paths are resolved against the file's own directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub mode: Mode,
    /// Run seed, combined with `backend.seed` for the mock generator.
    pub seed: u64,
    /// Retrieval depth.
    pub k: usize,
    /// How many past experiences are injected into bidirectional prompts.
    pub m_experiences: usize,
    pub thresholds: AcceptanceThresholds,
    /// Composition-ratio ceiling for write-back.
    pub alpha_max: f64,
    /// A query counts as covered when its best retrieval distance is
    /// strictly below this.
    pub relevance_distance: f64,
    pub train_queries: PathBuf,
    pub test_queries: PathBuf,
    pub seed_corpus: PathBuf,
    pub backend: BackendConfig,
    pub output_dir: PathBuf,
    /// Also generate and write back during the test phase. Off by default:
    /// the cleaner protocol keeps evaluation retrieval-only.
    pub write_back_during_test: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Standard,
            seed: 42,
            k: 5,
            m_experiences: 3,
            thresholds: AcceptanceThresholds::default(),
            alpha_max: 0.5,
            relevance_distance: 0.4,
            train_queries: PathBuf::from("train.jsonl"),
            test_queries: PathBuf::from("test.jsonl"),
            seed_corpus: PathBuf::from("corpus.jsonl"),
            backend: BackendConfig::default(),
            output_dir: PathBuf::from("runs"),
            write_back_during_test: false,
        }
    }
}

impl RunConfig {
    /// Read and validate a config file, resolving its relative paths.
    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: RunConfig = serde_json::from_str(&raw)
            .map_err(|e| Error::Config(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.resolve_paths(base);
        config.validate()?;
        Ok(config)
    }

    /// Anchor every relative path at `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        for p in [
            &mut self.train_queries,
            &mut self.test_queries,
            &mut self.seed_corpus,
            &mut self.output_dir,
        ] {
            if p.is_relative() {
                *p = base.join(&p);
            }
        }
    }

    /// Check field invariants.
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be positive".into()));
        }
        if self.m_experiences == 0 {
            return Err(Error::Config("m_experiences must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha_max) {
            return Err(Error::Config("alpha_max must lie in [0, 1]".into()));
        }
        if !(self.relevance_distance > 0.0 && self.relevance_distance < 2.0) {
            return Err(Error::Config(
                "relevance_distance must lie in (0, 2)".into(),
            ));
        }
        self.thresholds.validate().map_err(Error::Config)?;
        self.backend.validate().map_err(Error::Config)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        assert!(RunConfig::default().validate().is_ok());
    }

    #[test]
    fn rejects_out_of_range_fields() {
        let c = RunConfig {
            k: 0,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());

        let c = RunConfig {
            relevance_distance: 2.0,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());

        let c = RunConfig {
            alpha_max: -0.1,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn load_resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, r#"{"mode": "naive", "seed": 7}"#).unwrap();
        let config = RunConfig::load(&path).unwrap();
        assert_eq!(config.mode, Mode::Naive);
        assert_eq!(config.seed, 7);
        assert_eq!(config.train_queries, dir.path().join("train.jsonl"));
        assert_eq!(config.output_dir, dir.path().join("runs"));
    }

    #[test]
    fn load_keeps_absolute_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, r#"{"train_queries": "/tmp/elsewhere/train.jsonl"}"#).unwrap();
        let config = RunConfig::load(&path).unwrap();
        assert_eq!(
            config.train_queries,
            PathBuf::from("/tmp/elsewhere/train.jsonl")
        );
    }

    #[test]
    fn load_reports_malformed_json_as_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, "{not json").unwrap();
        match RunConfig::load(&path).unwrap_err() {
            Error::Config(msg) => assert!(msg.contains("config.json")),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn mode_serde_is_lowercase() {
        assert_eq!(
            serde_json::to_string(&Mode::Bidirectional).unwrap(),
            "\"bidirectional\""
        );
        assert_eq!(Mode::Standard.to_string(), "standard");
    }

    #[test]
    fn config_json_round_trip() {
        let config = RunConfig::default();
        let json = serde_json::to_string(&config).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, config);
    }
}
