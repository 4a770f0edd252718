use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::{CurveData, CurveKind, CurvePoint};
use super::metrics::{f1, roc_auc, roc_curve};
use crate::classifier::{Classifier, Learner};
use crate::data::{
    random_oversample, split, stratified_folds, ActivityVector, Corpus, SplitSpec, UNLABELED,
};
use crate::error::{Error, ErrorKind, Result};
use crate::labeling::{distant_label, SeedSets};
use crate::rng::derive_seed;
use crate::stats::mean_std;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStat {
    pub mean: f64,
    pub std: f64,
}

impl MetricStat {
    pub fn of(xs: &[f64]) -> Self {
        let (mean, std) = mean_std(xs);
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub model: String,
    pub replicates: usize,
    pub split: SplitSpec,
    pub roc_auc: MetricStat,
    pub f1: MetricStat,
    /// Test rows the model could not score, summed over replicates.
    pub excluded: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSpec {
    pub replicates: usize,
    pub test_fraction: f64,
    pub oversample: bool,
    pub seed: u64,
}

impl Default for BootstrapSpec {
    fn default() -> Self {
        Self {
            replicates: 100,
            test_fraction: 0.2,
            oversample: true,
            seed: 0,
        }
    }
}

impl BootstrapSpec {
    pub fn split_for(&self, replicate: usize) -> SplitSpec {
        SplitSpec {
            train_fraction: 1.0 - self.test_fraction,
            test_fraction: self.test_fraction,
            stratified: true,
            seed: derive_seed(self.seed, replicate as u64),
            oversample: self.oversample,
        }
    }
}

/// Scored labeled rows of a test set; rows the model rejects as
/// unscorable are dropped and counted.
pub struct Scored {
    pub scores: Vec<f64>,
    pub predictions: Vec<u8>,
    pub labels: Vec<u8>,
    pub kept: Vec<usize>,
    pub excluded: usize,
}

pub fn score_labeled(clf: &dyn Classifier, corpus: &Corpus) -> Result<Scored> {
    let rows: Vec<(usize, &ActivityVector, i32)> = corpus
        .iter()
        .enumerate()
        .filter(|(_, (_, y))| *y != UNLABELED)
        .map(|(i, (x, y))| (i, x, y))
        .collect();
    let results: Vec<Result<Option<(f64, u8)>>> = rows
        .par_iter()
        .map(
            |(_, x, _)| match clf.score(x).and_then(|s| Ok((s, clf.predict(x)?))) {
                Ok(v) => Ok(Some(v)),
                Err(e) if e.kind() == ErrorKind::Data => Ok(None),
                Err(e) => Err(e),
            },
        )
        .collect();
    let mut out = Scored {
        scores: vec![],
        predictions: vec![],
        labels: vec![],
        kept: vec![],
        excluded: 0,
    };
    for ((i, _, y), r) in rows.iter().zip(results) {
        match r? {
            Some((s, p)) => {
                out.scores.push(s);
                out.predictions.push(p);
                out.labels.push(*y as u8);
                out.kept.push(*i);
            }
            None => out.excluded += 1,
        }
    }
    if out.excluded > 0 {
        log::warn!(
            "{} test rows had no usable features and were excluded",
            out.excluded
        );
    }
    Ok(out)
}

/// ROC AUC and F1 (class 1) over repeated stratified train/test splits.
pub fn bootstrap_eval(
    learner: &dyn Learner,
    corpus: &Corpus,
    spec: &BootstrapSpec,
) -> Result<MetricReport> {
    if spec.replicates == 0 {
        return Err(Error::arg("need at least one bootstrap replicate"));
    }
    let per: Vec<(f64, f64, usize)> = (0..spec.replicates)
        .into_par_iter()
        .map(|r| {
            let (train, test) = split(corpus, &spec.split_for(r))?;
            let clf = learner.fit(&train)?;
            let s = score_labeled(clf.as_ref(), &test)?;
            Ok((
                roc_auc(&s.scores, &s.labels)?,
                f1(&s.predictions, &s.labels, 1)?,
                s.excluded,
            ))
        })
        .collect::<Result<_>>()?;
    let aucs: Vec<f64> = per.iter().map(|p| p.0).collect();
    let f1s: Vec<f64> = per.iter().map(|p| p.1).collect();
    Ok(MetricReport {
        model: learner.name(),
        replicates: spec.replicates,
        split: SplitSpec {
            seed: spec.seed,
            ..spec.split_for(0)
        },
        roc_auc: MetricStat::of(&aucs),
        f1: MetricStat::of(&f1s),
        excluded: per.iter().map(|p| p.2).sum(),
    })
}

/// Out-of-fold scores pooled across stratified folds into one ROC curve.
/// Unlabeled rows are always part of the training folds.
pub fn cv_roc(
    learner: &dyn Learner,
    corpus: &Corpus,
    folds: usize,
    seed: Option<u64>,
    oversample: bool,
) -> Result<CurveData> {
    let assignment = stratified_folds(corpus, folds, seed)?;
    let per_fold: Vec<(Vec<usize>, Vec<f64>)> = (0..folds)
        .into_par_iter()
        .map(|f| {
            let train_idx: Vec<usize> = (0..corpus.len())
                .filter(|&i| assignment[i] != Some(f))
                .collect();
            let test_idx: Vec<usize> = (0..corpus.len())
                .filter(|&i| assignment[i] == Some(f))
                .collect();
            let mut train = corpus.subset(&train_idx);
            if oversample {
                train = random_oversample(&train, derive_seed(seed.unwrap_or(0), f as u64))?;
            }
            let clf = learner.fit(&train)?;
            let s = score_labeled(clf.as_ref(), &corpus.subset(&test_idx))?;
            Ok((s.kept.iter().map(|&k| test_idx[k]).collect(), s.scores))
        })
        .collect::<Result<_>>()?;
    let mut pooled: Vec<(usize, f64)> = per_fold
        .into_iter()
        .flat_map(|(i, s)| i.into_iter().zip(s))
        .collect();
    pooled.sort_by_key(|p| p.0);
    let scores: Vec<f64> = pooled.iter().map(|p| p.1).collect();
    let labels: Vec<u8> = pooled.iter().map(|p| corpus.labels()[p.0] as u8).collect();
    let mut curve = CurveData::from_xy(
        CurveKind::Roc,
        learner.name(),
        &roc_curve(&scores, &labels)?,
    );
    curve.auc = Some(roc_auc(&scores, &labels)?);
    Ok(curve)
}

/// Metric on the confident subset `score ≤ τ or score ≥ 1 − τ` for each τ.
pub fn robustness_sweep(
    clf: &dyn Classifier,
    test: &Corpus,
    taus: &[f64],
    model: &str,
) -> Result<CurveData> {
    if let Some(t) = taus.iter().find(|t| !(0.0..=0.5).contains(*t)) {
        return Err(Error::arg(format!("threshold {t} outside [0, 0.5]")));
    }
    let s = score_labeled(clf, test)?;
    if s.scores.is_empty() {
        return Err(Error::data("nothing to score in the robustness test set"));
    }
    let points = taus
        .iter()
        .map(|&t| {
            let keep: Vec<usize> = (0..s.scores.len())
                .filter(|&i| s.scores[i] <= t || s.scores[i] >= 1.0 - t)
                .collect();
            let sc: Vec<f64> = keep.iter().map(|&i| s.scores[i]).collect();
            let lb: Vec<u8> = keep.iter().map(|&i| s.labels[i]).collect();
            CurvePoint {
                x: t,
                y: roc_auc(&sc, &lb).ok(),
                y_std: None,
                retained: Some(keep.len() as f64 / s.scores.len() as f64),
            }
        })
        .collect();
    Ok(CurveData {
        kind: CurveKind::Robustness,
        model: model.into(),
        points,
        auc: None,
    })
}

/// Predicts the training majority class with the class-1 training share
/// as a constant score.
#[derive(Debug, Clone, Copy, Default)]
pub struct MajorityLearner;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Majority {
    pub prior: f64,
}

impl Classifier for Majority {
    fn score(&self, _: &ActivityVector) -> Result<f64> {
        Ok(self.prior)
    }

    fn predict(&self, _: &ActivityVector) -> Result<u8> {
        Ok((self.prior > 0.5) as u8)
    }
}

impl Learner for MajorityLearner {
    fn name(&self) -> String {
        "Majority".into()
    }

    fn fit(&self, train: &Corpus) -> Result<Box<dyn Classifier>> {
        let prior = train
            .prevalence()
            .ok_or_else(|| Error::data("no labeled training rows"))?;
        Ok(Box::new(Majority { prior }))
    }
}

/// Trains `inner` on labels from seed-community participation instead of
/// the training rows' own labels. Rows the seeds leave undecided stay in
/// the training set, unlabeled.
#[derive(Debug, Clone)]
pub struct DistantLearner<L> {
    pub inner: L,
    pub seeds: SeedSets,
}

impl<L: Learner> Learner for DistantLearner<L> {
    fn name(&self) -> String {
        self.inner.name()
    }

    fn fit(&self, train: &Corpus) -> Result<Box<dyn Classifier>> {
        let distant = distant_label(train, &self.seeds)?;
        self.inner.fit(&train.with_labels(distant.labels)?)
    }
}
