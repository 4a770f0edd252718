use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::{CurveData, CurveKind, CurvePoint};
use super::protocol::score_labeled;
use crate::calibrate::fit_isotonic;
use crate::classifier::{Calibrated, Classifier, Learner};
use crate::data::{split, Corpus, SplitSpec, UNLABELED};
use crate::error::{Error, Result};
use crate::quantify::{evaluate_cohorts, fit_from_predictions, npp_sample, NppSpec, QuantMode};
use crate::rng::{derive_seed, stage_rng};
use crate::stats::mean_std;

/// Train/validation/test protocol for prevalence estimation: hold out a
/// test pool, carve a validation split from the training part for the
/// calibrator and the ACC rates, then score natural-prevalence cohorts
/// drawn from the pool.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantProtocol {
    pub test_fraction: f64,
    pub validation_fraction: f64,
    /// Independent train/test partitions.
    pub splits: usize,
    /// Cohorts per partition.
    pub repeats: usize,
    pub cohort_size: usize,
    pub mode: QuantMode,
    pub calibrate: bool,
    pub confidence: Option<f64>,
    pub oversample: bool,
    pub seed: u64,
}

impl Default for QuantProtocol {
    fn default() -> Self {
        Self {
            test_fraction: 0.3,
            validation_fraction: 0.2,
            splits: 50,
            repeats: 50,
            cohort_size: 100,
            mode: QuantMode::Acc,
            calibrate: false,
            confidence: None,
            oversample: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantOutcome {
    pub model: String,
    pub method: String,
    pub mae: f64,
    pub std: f64,
    pub cohorts: usize,
    /// Share of cohorts whose interval contains the true prevalence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<f64>,
    pub excluded: usize,
}

struct SplitResult {
    errors: Vec<f64>,
    covered: Option<Vec<bool>>,
    excluded: usize,
}

/// Keeps `size` labeled rows chosen uniformly (all unlabeled rows stay).
fn subsample_labeled(corpus: &Corpus, size: usize, seed: u64) -> Result<Corpus> {
    let mut labeled: Vec<usize> = (0..corpus.len())
        .filter(|&i| corpus.labels()[i] != UNLABELED)
        .collect();
    if size > labeled.len() {
        return Err(Error::arg(format!(
            "training size {size} exceeds the {} labeled rows available",
            labeled.len()
        )));
    }
    labeled.shuffle(&mut stage_rng(seed, 0));
    let mut keep: Vec<usize> = labeled[..size].to_vec();
    keep.extend(corpus.class_indices(UNLABELED));
    keep.sort_unstable();
    Ok(corpus.subset(&keep))
}

fn run_split(
    learner: &dyn Learner,
    corpus: &Corpus,
    proto: &QuantProtocol,
    train_size: Option<usize>,
    s: usize,
) -> Result<SplitResult> {
    let seed = derive_seed(proto.seed, s as u64);
    let (train, test) = split(
        corpus,
        &SplitSpec::holdout(proto.test_fraction, derive_seed(seed, 1)),
    )?;
    let train = match train_size {
        Some(n) => subsample_labeled(&train, n, derive_seed(seed, 2))?,
        None => train,
    };
    let (fit_part, validation) = split(
        &train,
        &SplitSpec {
            oversample: proto.oversample,
            ..SplitSpec::holdout(proto.validation_fraction, derive_seed(seed, 3))
        },
    )?;
    let base = learner.fit(&fit_part)?;
    let val = score_labeled(base.as_ref(), &validation)?;
    let clf: Box<dyn Classifier> = if proto.calibrate {
        Box::new(Calibrated {
            inner: base,
            map: fit_isotonic(&val.scores, &val.labels)?,
        })
    } else {
        base
    };
    let quantifier = fit_from_predictions(&val.predictions, &val.labels, proto.mode)?;

    let scored = score_labeled(clf.as_ref(), &test)?;
    let pool = test.subset(&scored.kept);
    let prevalence = pool
        .prevalence()
        .ok_or_else(|| Error::data("empty test pool"))?;
    let cohorts = npp_sample(
        &pool,
        &NppSpec {
            prevalence,
            repeats: proto.repeats,
            size: proto.cohort_size,
            seed: derive_seed(seed, 4),
        },
    )?;
    let report = evaluate_cohorts(&quantifier, clf.as_ref(), &pool, &cohorts, proto.confidence)?;
    let errors = report
        .cohorts
        .iter()
        .map(|c| (c.estimate.estimate - c.true_prevalence.unwrap_or(f64::NAN)).abs())
        .collect();
    let covered = report
        .cohorts
        .iter()
        .map(
            |c| match (c.estimate.lo, c.estimate.hi, c.true_prevalence) {
                (Some(lo), Some(hi), Some(t)) => Some(lo <= t && t <= hi),
                _ => None,
            },
        )
        .collect();
    Ok(SplitResult {
        errors,
        covered,
        excluded: val.excluded + scored.excluded,
    })
}

pub fn run_quant_protocol(
    learner: &dyn Learner,
    corpus: &Corpus,
    proto: &QuantProtocol,
    train_size: Option<usize>,
) -> Result<QuantOutcome> {
    if proto.splits == 0 {
        return Err(Error::arg("need at least one train/test partition"));
    }
    let per: Vec<SplitResult> = (0..proto.splits)
        .into_par_iter()
        .map(|s| run_split(learner, corpus, proto, train_size, s))
        .collect::<Result<_>>()?;
    let errors: Vec<f64> = per.iter().flat_map(|p| p.errors.iter().copied()).collect();
    let covered: Option<Vec<bool>> = per
        .iter()
        .map(|p| p.covered.clone())
        .collect::<Option<Vec<_>>>()
        .map(|v| v.concat());
    let (mae, std) = mean_std(&errors);
    Ok(QuantOutcome {
        model: learner.name(),
        method: proto.mode.tag().to_uppercase(),
        mae,
        std,
        cohorts: errors.len(),
        coverage: covered.map(|c| c.iter().filter(|&&b| b).count() as f64 / c.len().max(1) as f64),
        excluded: per.iter().map(|p| p.excluded).sum(),
    })
}

/// Quantification MAE as a function of the number of labeled training rows.
pub fn learning_curve(
    learner: &dyn Learner,
    corpus: &Corpus,
    sizes: &[usize],
    proto: &QuantProtocol,
) -> Result<CurveData> {
    if sizes.is_empty() || sizes[0] == 0 || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::arg(
            "learning-curve sizes must be positive and strictly increasing",
        ));
    }
    let points = sizes
        .iter()
        .map(|&n| {
            let o = run_quant_protocol(learner, corpus, proto, Some(n))?;
            Ok(CurvePoint {
                x: n as f64,
                y: Some(o.mae),
                y_std: Some(o.std),
                retained: None,
            })
        })
        .collect::<Result<_>>()?;
    Ok(CurveData {
        kind: CurveKind::Learning,
        model: format!("{} {}", learner.name(), proto.mode.tag().to_uppercase()),
        points,
        auc: None,
    })
}
