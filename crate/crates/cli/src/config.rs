//! Run configuration: a TOML file whose every field can be overridden by a
//! command-line flag.

use std::path::{Path, PathBuf};

use selfdecl::axis::Projection;
use selfdecl::bayes::{ActivityEstimator, EmConfig, NbConfig};
use selfdecl::labeling::Attribute;
use selfdecl::quantify::QuantMode;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CorpusFormatKind {
    #[default]
    Jsonl,
    Triplets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Nb,
    Wa,
    Majority,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Supervision {
    #[default]
    True,
    Distant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub corpus_format: CorpusFormatKind,
    /// `user,label` CSV; replaces the corpus labels when given.
    pub labels: Option<PathBuf>,
    pub vocab: Option<PathBuf>,
    pub comments: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub seeds: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub botlist: Option<PathBuf>,
    pub model_file: Option<PathBuf>,
    /// Labeled corpus for calibration and ACC rates.
    pub validation: Option<PathBuf>,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub alpha1: f64,
    pub alpha2: f64,
    pub log_normal: bool,
    pub activity_estimator: ActivityEstimator,
    pub semi_supervised: bool,
    pub max_iter: usize,
    pub tol: f64,
    pub projection: Projection,
    pub supervision: Supervision,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let nb = NbConfig::default();
        let em = EmConfig::default();
        Self {
            kind: ModelKind::Nb,
            alpha1: nb.alpha_prior,
            alpha2: nb.alpha_feature,
            log_normal: false,
            activity_estimator: ActivityEstimator::default(),
            semi_supervised: false,
            max_iter: em.max_iter,
            tol: em.tol,
            projection: Projection::default(),
            supervision: Supervision::True,
        }
    }
}

impl ModelConfig {
    pub fn nb(&self) -> NbConfig {
        NbConfig {
            alpha_prior: self.alpha1,
            alpha_feature: self.alpha2,
            log_normal: self.log_normal,
            activity_estimator: self.activity_estimator,
        }
    }

    pub fn em(&self) -> Option<EmConfig> {
        self.semi_supervised.then_some(EmConfig {
            max_iter: self.max_iter,
            tol: self.tol,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    pub bootstrap: usize,
    pub test_fraction: f64,
    /// Held-out pool share for the quantification protocol.
    pub pool_fraction: f64,
    pub validation_fraction: f64,
    pub oversample: bool,
    pub folds: usize,
    pub splits: usize,
    pub repeats: usize,
    pub cohort_size: usize,
    pub mode: QuantMode,
    pub calibrate: bool,
    pub confidence: Option<f64>,
    pub taus: Vec<f64>,
    pub sizes: Vec<usize>,
    pub rounds: usize,
    pub bins: usize,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            bootstrap: 100,
            test_fraction: 0.2,
            pool_fraction: 0.3,
            validation_fraction: 0.2,
            oversample: true,
            folds: 10,
            splits: 50,
            repeats: 50,
            cohort_size: 100,
            mode: QuantMode::Acc,
            calibrate: false,
            confidence: None,
            taus: vec![0.5, 0.4, 0.3, 0.2, 0.1, 0.05],
            sizes: vec![100, 300, 1000, 3000, 10000],
            rounds: 100,
            bins: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub attribute: Option<Attribute>,
    pub paths: Paths,
    pub model: ModelConfig,
    pub protocol: ProtocolConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            attribute: None,
            paths: Paths {
                out: PathBuf::from("out"),
                ..Default::default()
            },
            model: ModelConfig::default(),
            protocol: ProtocolConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::usage(format!("invalid config: {e}")))
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::usage(format!("cannot serialize config: {e}")))
    }

    /// Range checks on every numeric field. Paths are checked when a command
    /// needs them.
    pub fn validate(&self) -> CliResult<()> {
        let m = &self.model;
        let p = &self.protocol;
        let fraction = |v: f64| v > 0.0 && v < 1.0;
        let checks: [(bool, &str); 15] = [
            (m.alpha1 > 0.0, "alpha1 must be positive"),
            (m.alpha2 > 0.0, "alpha2 must be positive"),
            (m.max_iter >= 1, "max_iter must be at least 1"),
            (m.tol > 0.0, "tol must be positive"),
            (p.bootstrap >= 1, "bootstrap must be at least 1"),
            (
                fraction(p.test_fraction),
                "test_fraction must lie in (0, 1)",
            ),
            (
                fraction(p.pool_fraction),
                "pool_fraction must lie in (0, 1)",
            ),
            (
                fraction(p.validation_fraction),
                "validation_fraction must lie in (0, 1)",
            ),
            (p.folds >= 2, "folds must be at least 2"),
            (
                p.splits >= 1 && p.repeats >= 1,
                "splits and repeats must be at least 1",
            ),
            (p.cohort_size >= 1, "cohort_size must be at least 1"),
            (
                p.confidence.is_none_or(fraction),
                "confidence must lie in (0, 1)",
            ),
            (
                p.taus.iter().all(|t| (0.0..=0.5).contains(t)),
                "taus must lie in [0, 0.5]",
            ),
            (p.rounds >= 2, "rounds must be at least 2"),
            (p.bins >= 2, "bins must be at least 2"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(CliError::usage(*msg)),
            None => Ok(()),
        }
    }
}

/// Fetches a required path or explains which flag is missing.
pub fn require<'a>(path: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a Path> {
    let p = path.as_deref().ok_or_else(|| {
        CliError::usage(format!(
            "missing --{flag} (or paths.{} in the config)",
            flag.replace('-', "_")
        ))
    })?;
    if !p.exists() {
        return Err(CliError::usage(format!(
            "--{flag}: {} does not exist",
            p.display()
        )));
    }
    Ok(p)
}
