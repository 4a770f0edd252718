//! Command-line surface. Every config field has a flag; flags win over the
//! config file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use selfdecl::axis::Projection;
use selfdecl::bayes::ActivityEstimator;
use selfdecl::labeling::Attribute;
use selfdecl::quantify::QuantMode;
use serde::de::DeserializeOwned;

use crate::config::{CorpusFormatKind, ModelKind, RunConfig, Supervision};

#[derive(Debug, Parser)]
#[command(
    name = "selfdecl",
    version,
    about = "Demographic labeling, inference and prevalence estimation from community activity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Print failures as one JSON object on stderr.
    #[arg(long, global = true)]
    pub error_json: bool,

    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    /// Bootstrap ROC AUC and F1.
    Classify,
    /// Natural-prevalence cohorts, MAE.
    Quantify,
    /// Cross-validated ROC curve.
    Roc,
    /// AUC on confidently scored users as the filter tightens.
    Robustness,
    /// Quantification MAE against training-set size.
    Learning,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find self-declarations in comments and resolve per-user labels.
    Extract,
    /// Label users from seed-community participation.
    LabelDistant,
    /// Fit a model and write it with its fit report.
    Train,
    /// Score every user of a corpus with a saved model.
    Predict,
    /// Estimate the class-1 prevalence of a corpus.
    Quantify,
    /// Run an evaluation protocol.
    Evaluate {
        #[arg(long, value_enum, default_value = "classify")]
        task: Task,
    },
    /// Per-community log-odds with bootstrap spread.
    Importance,
    /// Attach an isotonic calibrator to a saved model.
    Calibrate,
    /// Classification and quantification tables for every model.
    Report,
}

fn serde_value<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub attribute: Option<Attribute>,

    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub corpus_format: Option<CorpusFormatKind>,
    #[arg(long, global = true)]
    pub labels: Option<PathBuf>,
    #[arg(long, global = true)]
    pub vocab: Option<PathBuf>,
    #[arg(long, global = true)]
    pub comments: Option<PathBuf>,
    #[arg(long, global = true)]
    pub rules: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seeds: Option<PathBuf>,
    #[arg(long, global = true)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, global = true)]
    pub botlist: Option<PathBuf>,
    #[arg(long, global = true)]
    pub model_file: Option<PathBuf>,
    #[arg(long, global = true)]
    pub validation: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long, global = true)]
    pub alpha1: Option<f64>,
    #[arg(long, global = true)]
    pub alpha2: Option<f64>,
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub log_normal: Option<bool>,
    #[arg(long, global = true, value_parser = serde_value::<ActivityEstimator>)]
    pub activity_estimator: Option<ActivityEstimator>,
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub semi_supervised: Option<bool>,
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_parser = serde_value::<Projection>)]
    pub projection: Option<Projection>,
    #[arg(long, global = true, value_enum)]
    pub supervision: Option<Supervision>,

    #[arg(long, global = true)]
    pub bootstrap: Option<usize>,
    #[arg(long, global = true)]
    pub test_fraction: Option<f64>,
    #[arg(long, global = true)]
    pub pool_fraction: Option<f64>,
    #[arg(long, global = true)]
    pub validation_fraction: Option<f64>,
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub oversample: Option<bool>,
    #[arg(long, global = true)]
    pub folds: Option<usize>,
    #[arg(long, global = true)]
    pub splits: Option<usize>,
    #[arg(long, global = true)]
    pub repeats: Option<usize>,
    #[arg(long, global = true)]
    pub cohort_size: Option<usize>,
    #[arg(long, global = true, value_parser = serde_value::<QuantMode>)]
    pub mode: Option<QuantMode>,
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub calibrate: Option<bool>,
    #[arg(long, global = true)]
    pub confidence: Option<f64>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub taus: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long, global = true)]
    pub rounds: Option<usize>,
    #[arg(long, global = true)]
    pub bins: Option<usize>,
}

macro_rules! set {
    ($src:expr => $dst:expr) => {
        if let Some(v) = $src.clone() {
            $dst = v;
        }
    };
    ($src:expr => some $dst:expr) => {
        if let Some(v) = $src.clone() {
            $dst = Some(v);
        }
    };
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        set!(self.seed => cfg.seed);
        set!(self.attribute => some cfg.attribute);

        let p = &mut cfg.paths;
        set!(self.corpus => some p.corpus);
        set!(self.corpus_format => p.corpus_format);
        set!(self.labels => some p.labels);
        set!(self.vocab => some p.vocab);
        set!(self.comments => some p.comments);
        set!(self.rules => some p.rules);
        set!(self.seeds => some p.seeds);
        set!(self.embeddings => some p.embeddings);
        set!(self.botlist => some p.botlist);
        set!(self.model_file => some p.model_file);
        set!(self.validation => some p.validation);
        set!(self.out => p.out);

        let m = &mut cfg.model;
        set!(self.model => m.kind);
        set!(self.alpha1 => m.alpha1);
        set!(self.alpha2 => m.alpha2);
        set!(self.log_normal => m.log_normal);
        set!(self.activity_estimator => m.activity_estimator);
        set!(self.semi_supervised => m.semi_supervised);
        set!(self.max_iter => m.max_iter);
        set!(self.tol => m.tol);
        set!(self.projection => m.projection);
        set!(self.supervision => m.supervision);

        let r = &mut cfg.protocol;
        set!(self.bootstrap => r.bootstrap);
        set!(self.test_fraction => r.test_fraction);
        set!(self.pool_fraction => r.pool_fraction);
        set!(self.validation_fraction => r.validation_fraction);
        set!(self.oversample => r.oversample);
        set!(self.folds => r.folds);
        set!(self.splits => r.splits);
        set!(self.repeats => r.repeats);
        set!(self.cohort_size => r.cohort_size);
        set!(self.mode => r.mode);
        set!(self.calibrate => r.calibrate);
        set!(self.confidence => some r.confidence);
        set!(self.taus => r.taus);
        set!(self.sizes => r.sizes);
        set!(self.rounds => r.rounds);
        set!(self.bins => r.bins);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let mut cfg =
            RunConfig::from_toml("seed = 3\n[model]\nalpha2 = 0.5\nlog_normal = true\n").unwrap();
        let cli = Cli::try_parse_from([
            "selfdecl",
            "train",
            "--alpha2",
            "2",
            "--log-normal=false",
            "--taus",
            "0.4,0.1",
        ])
        .unwrap();
        cli.overrides.apply(&mut cfg);
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.model.alpha2, 2.0);
        assert!(!cfg.model.log_normal);
        assert_eq!(cfg.protocol.taus, vec![0.4, 0.1]);
    }

    #[test]
    fn bare_boolean_flag_means_true() {
        let mut cfg = RunConfig::default();
        let cli = Cli::try_parse_from(["selfdecl", "train", "--semi-supervised", "--mode", "cc"])
            .unwrap();
        cli.overrides.apply(&mut cfg);
        assert!(cfg.model.semi_supervised);
        assert_eq!(cfg.protocol.mode, QuantMode::Cc);
    }

    #[test]
    fn evaluate_task_defaults_to_classify() {
        let cli = Cli::try_parse_from(["selfdecl", "evaluate"]).unwrap();
        assert!(matches!(
            cli.command,
            Command::Evaluate {
                task: Task::Classify
            }
        ));
    }
}
