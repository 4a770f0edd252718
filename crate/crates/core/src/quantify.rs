//! Prevalence estimation: classify-and-count, adjusted classify-and-count,
//! Poisson-Binomial intervals and natural-prevalence cohort sampling.

use rand::seq::index::sample;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::Classifier;
use crate::data::{ActivityVector, Corpus};
use crate::error::{Error, Result};
use crate::rng::stage_rng;
use crate::stats::{mean_std, normal_critical};

/// Smallest |tpr − fpr| for which the adjustment is considered defined.
pub const MIN_RATE_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum QuantMode {
    Cc,
    #[default]
    Acc,
}

impl QuantMode {
    pub fn tag(self) -> &'static str {
        match self {
            QuantMode::Cc => "cc",
            QuantMode::Acc => "acc",
        }
    }
}

/// A fitted quantifier: the mode plus, for ACC, the validation rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantifier {
    pub mode: QuantMode,
    pub tpr: Option<f64>,
    pub fpr: Option<f64>,
    pub validation_size: usize,
}

impl Quantifier {
    pub fn cc() -> Self {
        Self {
            mode: QuantMode::Cc,
            tpr: None,
            fpr: None,
            validation_size: 0,
        }
    }

    pub fn acc(tpr: f64, fpr: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tpr) || !(0.0..=1.0).contains(&fpr) {
            return Err(Error::arg("tpr and fpr must lie in [0, 1]"));
        }
        if (tpr - fpr).abs() < MIN_RATE_GAP {
            return Err(Error::Numeric(format!(
                "degenerate classifier: tpr = {tpr}, fpr = {fpr}; the adjustment is undefined"
            )));
        }
        Ok(Self {
            mode: QuantMode::Acc,
            tpr: Some(tpr),
            fpr: Some(fpr),
            validation_size: 0,
        })
    }

    /// Maps a raw classify-and-count fraction to this quantifier's estimate.
    pub fn adjust(&self, cc: f64) -> f64 {
        match (self.mode, self.tpr, self.fpr) {
            (QuantMode::Acc, Some(tpr), Some(fpr)) => ((cc - fpr) / (tpr - fpr)).clamp(0.0, 1.0),
            _ => cc,
        }
    }

    /// Factor by which interval widths are stretched by [`Self::adjust`].
    pub fn width_scale(&self) -> f64 {
        match (self.mode, self.tpr, self.fpr) {
            (QuantMode::Acc, Some(tpr), Some(fpr)) => 1.0 / (tpr - fpr).abs(),
            _ => 1.0,
        }
    }
}

/// Estimates rates from hard predictions against binary labels.
pub fn fit_from_predictions(
    predictions: &[u8],
    labels: &[u8],
    mode: QuantMode,
) -> Result<Quantifier> {
    if predictions.len() != labels.len() {
        return Err(Error::arg("predictions and labels differ in length"));
    }
    if mode == QuantMode::Cc {
        return Ok(Quantifier {
            validation_size: labels.len(),
            ..Quantifier::cc()
        });
    }
    let (mut tp, mut pos, mut fp, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &y) in predictions.iter().zip(labels) {
        if y == 1 {
            pos += 1;
            tp += (p == 1) as usize;
        } else {
            neg += 1;
            fp += (p == 1) as usize;
        }
    }
    if pos == 0 || neg == 0 {
        return Err(Error::data(
            "adjusted counting needs both classes in the validation data",
        ));
    }
    let mut q = Quantifier::acc(tp as f64 / pos as f64, fp as f64 / neg as f64)?;
    q.validation_size = labels.len();
    Ok(q)
}

/// Fits on the labeled rows of a validation corpus.
pub fn fit_quantifier(
    clf: &dyn Classifier,
    validation: &Corpus,
    mode: QuantMode,
) -> Result<Quantifier> {
    let labeled = validation.labeled_only();
    let predictions = clf.predict_all(labeled.rows())?;
    let labels: Vec<u8> = labeled.labels().iter().map(|&l| l as u8).collect();
    fit_from_predictions(&predictions, &labels, mode)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceEstimate {
    pub estimate: f64,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub confidence: Option<f64>,
    pub m: usize,
    pub method: String,
}

/// `z · √(Σ q(1 − q)) / m`.
pub fn poisson_binomial_half_width(q: &[f64], confidence: f64) -> f64 {
    let var: f64 = q.iter().map(|p| p * (1.0 - p)).sum();
    normal_critical(confidence) * var.sqrt() / q.len() as f64
}

/// Normal-approximation interval for the fraction of successes among
/// independent Bernoulli(qᵢ) trials, centred on the mean of q.
pub fn poisson_binomial_interval(q: &[f64], confidence: f64) -> (f64, f64) {
    let mean = q.iter().sum::<f64>() / q.len() as f64;
    let hw = poisson_binomial_half_width(q, confidence);
    ((mean - hw).max(0.0), (mean + hw).min(1.0))
}

/// Exact distribution of the number of successes, by convolution.
pub fn poisson_binomial_pmf(q: &[f64]) -> Vec<f64> {
    let mut pmf = vec![0.0; q.len() + 1];
    pmf[0] = 1.0;
    for (i, &p) in q.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            pmf[k] = pmf[k] * (1.0 - p) + pmf[k - 1] * p;
        }
        pmf[0] *= 1.0 - p;
    }
    pmf
}

/// Equal-tailed interval from the exact distribution, as fractions of m.
pub fn poisson_binomial_exact_interval(q: &[f64], confidence: f64) -> (f64, f64) {
    let pmf = poisson_binomial_pmf(q);
    let tail = (1.0 - confidence) / 2.0;
    let m = q.len() as f64;
    let mut cdf = 0.0;
    let (mut lo, mut hi) = (None, None);
    for (k, p) in pmf.iter().enumerate() {
        cdf += p;
        if lo.is_none() && cdf >= tail {
            lo = Some(k);
        }
        if hi.is_none() && cdf >= 1.0 - tail {
            hi = Some(k);
        }
    }
    let hi = hi.unwrap_or(q.len());
    (lo.unwrap_or(0) as f64 / m, hi as f64 / m)
}

/// Point estimate from hard predictions; an interval is attached when
/// calibrated scores and a confidence level are both supplied.
pub fn estimate_from_parts(
    quantifier: &Quantifier,
    predictions: &[u8],
    scores: Option<&[f64]>,
    confidence: Option<f64>,
) -> Result<PrevalenceEstimate> {
    let m = predictions.len();
    if m == 0 {
        return Err(Error::data("cannot estimate prevalence of an empty cohort"));
    }
    let cc = predictions.iter().filter(|&&p| p == 1).count() as f64 / m as f64;
    let estimate = quantifier.adjust(cc);
    let (mut lo, mut hi) = (None, None);
    if let (Some(q), Some(conf)) = (scores, confidence) {
        if q.len() != m {
            return Err(Error::arg("scores and predictions differ in length"));
        }
        if !(conf > 0.0 && conf < 1.0) {
            return Err(Error::arg("confidence must lie in (0, 1)"));
        }
        let hw = poisson_binomial_half_width(q, conf) * quantifier.width_scale();
        lo = Some((estimate - hw).max(0.0));
        hi = Some((estimate + hw).min(1.0));
    }
    Ok(PrevalenceEstimate {
        estimate,
        lo,
        hi,
        confidence: lo.and(confidence),
        m,
        method: quantifier.mode.tag().into(),
    })
}

pub fn estimate(
    quantifier: &Quantifier,
    clf: &dyn Classifier,
    cohort: &[ActivityVector],
    confidence: Option<f64>,
) -> Result<PrevalenceEstimate> {
    let predictions = clf.predict_all(cohort)?;
    let scores = match confidence {
        Some(_) if clf.is_calibrated() => Some(clf.score_all(cohort)?),
        Some(_) => {
            log::warn!("classifier is not calibrated; prevalence interval omitted");
            None
        }
        None => None,
    };
    estimate_from_parts(quantifier, &predictions, scores.as_deref(), confidence)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NppSpec {
    pub prevalence: f64,
    pub repeats: usize,
    pub size: usize,
    pub seed: u64,
}

/// One sampled evaluation cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cohort {
    pub repeat: usize,
    /// Row indices into the pool, ascending.
    pub indices: Vec<usize>,
    pub prevalence: f64,
}

/// Draws cohorts whose class-1 count is Binomial(m, p); rows are taken
/// without replacement within each class. Repeat `r` depends only on
/// `(seed, r)`.
pub fn npp_sample(pool: &Corpus, spec: &NppSpec) -> Result<Vec<Cohort>> {
    if !(0.0..=1.0).contains(&spec.prevalence) {
        return Err(Error::arg("prevalence must lie in [0, 1]"));
    }
    if spec.size == 0 || spec.repeats == 0 {
        return Err(Error::arg("cohort size and repeat count must be positive"));
    }
    if pool.k() != 2 {
        return Err(Error::arg("cohort sampling needs a binary pool"));
    }
    let neg = pool.class_indices(0);
    let pos = pool.class_indices(1);
    let binom =
        Binomial::new(spec.size as u64, spec.prevalence).map_err(|e| Error::arg(e.to_string()))?;
    (0..spec.repeats)
        .into_par_iter()
        .map(|r| {
            let mut rng = stage_rng(spec.seed, r as u64);
            let n_pos = binom.sample(&mut rng) as usize;
            let n_neg = spec.size - n_pos;
            if n_pos > pos.len() || n_neg > neg.len() {
                return Err(Error::data(format!(
                    "cohort {r} needs {n_pos} class-1 and {n_neg} class-0 rows; pool has {} and {}",
                    pos.len(),
                    neg.len()
                )));
            }
            let mut indices: Vec<usize> = sample(&mut rng, pos.len(), n_pos)
                .into_iter()
                .map(|i| pos[i])
                .collect();
            indices.extend(
                sample(&mut rng, neg.len(), n_neg)
                    .into_iter()
                    .map(|i| neg[i]),
            );
            indices.sort_unstable();
            Ok(Cohort {
                repeat: r,
                indices,
                prevalence: n_pos as f64 / spec.size as f64,
            })
        })
        .collect()
}

pub fn mae(estimates: &[f64], truth: &[f64]) -> Result<f64> {
    if estimates.len() != truth.len() {
        return Err(Error::arg(
            "estimates and true prevalences differ in length",
        ));
    }
    if estimates.is_empty() {
        return Err(Error::arg("mean absolute error of nothing"));
    }
    Ok(estimates
        .iter()
        .zip(truth)
        .map(|(e, t)| (e - t).abs())
        .sum::<f64>()
        / estimates.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortResult {
    #[serde(flatten)]
    pub estimate: PrevalenceEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub true_prevalence: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantReport {
    pub cohorts: Vec<CohortResult>,
    pub mae: Option<f64>,
    /// Sample standard deviation of the absolute errors.
    pub std: Option<f64>,
}

impl QuantReport {
    pub fn new(cohorts: Vec<CohortResult>) -> Self {
        let errors: Option<Vec<f64>> = cohorts
            .iter()
            .map(|c| c.true_prevalence.map(|t| (c.estimate.estimate - t).abs()))
            .collect();
        let (mae, std) = match errors {
            Some(e) if !e.is_empty() => {
                let (m, s) = mean_std(&e);
                (Some(m), Some(s))
            }
            _ => (None, None),
        };
        Self { cohorts, mae, std }
    }
}

/// Estimates every cohort of a labeled pool and scores against the truth.
pub fn evaluate_cohorts(
    quantifier: &Quantifier,
    clf: &dyn Classifier,
    pool: &Corpus,
    cohorts: &[Cohort],
    confidence: Option<f64>,
) -> Result<QuantReport> {
    let predictions = clf.predict_all(pool.rows())?;
    let scores = match confidence {
        Some(_) if clf.is_calibrated() => Some(clf.score_all(pool.rows())?),
        _ => None,
    };
    let results = cohorts
        .par_iter()
        .map(|c| {
            let p: Vec<u8> = c.indices.iter().map(|&i| predictions[i]).collect();
            let s: Option<Vec<f64>> = scores
                .as_ref()
                .map(|s| c.indices.iter().map(|&i| s[i]).collect());
            let e = estimate_from_parts(quantifier, &p, s.as_deref(), confidence)?;
            Ok(CohortResult {
                estimate: e,
                true_prevalence: Some(c.prevalence),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QuantReport::new(results))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::data::Vocabulary;

    #[test]
    fn perfect_classifier_rates() {
        let y = [1, 0, 1, 1, 0];
        let q = fit_from_predictions(&y, &y, QuantMode::Acc).unwrap();
        assert_eq!((q.tpr, q.fpr), (Some(1.0), Some(0.0)));
        for cc in [0.0, 0.3, 0.77, 1.0] {
            assert_eq!(q.adjust(cc), Quantifier::cc().adjust(cc));
        }
    }

    #[test]
    fn coin_flip_is_degenerate() {
        // predicts 1 on every other row regardless of the label
        let labels: Vec<u8> = (0..100).map(|i| (i / 2 % 2) as u8).collect();
        let preds: Vec<u8> = (0..100).map(|i| (i % 2) as u8).collect();
        let err = fit_from_predictions(&preds, &labels, QuantMode::Acc).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
    }

    #[test]
    fn known_confusion() {
        // 10 positives with 8 predicted positive, 10 negatives with 2
        let labels: Vec<u8> = [vec![1; 10], vec![0; 10]].concat();
        let preds: Vec<u8> = [vec![1; 8], vec![0; 2], vec![1; 2], vec![0; 8]].concat();
        let q = fit_from_predictions(&preds, &labels, QuantMode::Acc).unwrap();
        assert_eq!((q.tpr, q.fpr), (Some(0.8), Some(0.2)));
        assert_eq!(q.validation_size, 20);
        assert!(fit_from_predictions(&preds[..10], &labels[..10], QuantMode::Acc).is_err());
    }

    #[test]
    fn acc_arithmetic_matches_grid_inversion() {
        let q = Quantifier::acc(0.8, 0.2).unwrap();
        let acc = q.adjust(0.6);
        assert!((acc - 2.0 / 3.0).abs() < 1e-15);
        // E[cc] = tpr·p + fpr·(1 − p); pick the grid p closest to 0.6
        let best = (0..=100_000)
            .map(|i| i as f64 / 100_000.0)
            .min_by(|a, b| {
                let f = |p: f64| (0.8 * p + 0.2 * (1.0 - p) - 0.6).abs();
                f(*a).total_cmp(&f(*b))
            })
            .unwrap();
        assert!((acc - best).abs() < 1e-5);
        assert_eq!(q.adjust(0.0), 0.0);
        assert_eq!(q.adjust(1.0), 1.0);
    }

    #[test]
    fn all_positive_cohort() {
        let e = estimate_from_parts(&Quantifier::cc(), &[1; 7], None, Some(0.95)).unwrap();
        assert_eq!(e.estimate, 1.0);
        assert_eq!(e.lo, None);
        assert!(estimate_from_parts(&Quantifier::cc(), &[], None, None).is_err());
    }

    #[test]
    fn binomial_half_width() {
        let hw = poisson_binomial_half_width(&[0.5; 100], 0.95);
        assert!((hw - 1.959_963_984_540_054 * 5.0 / 100.0).abs() < 1e-12);
        assert!((hw - 0.098).abs() < 1e-3);
        let e = estimate_from_parts(
            &Quantifier::cc(),
            &[1, 0].repeat(50),
            Some(&[0.5; 100]),
            Some(0.95),
        )
        .unwrap();
        assert!((e.hi.unwrap() - e.lo.unwrap() - 2.0 * hw).abs() < 1e-12);
        let q = Quantifier::acc(0.8, 0.3).unwrap();
        let a = estimate_from_parts(&q, &[1, 0].repeat(50), Some(&[0.5; 100]), Some(0.95)).unwrap();
        assert!((a.hi.unwrap() - a.estimate - hw / 0.5).abs() < 1e-12);
    }

    #[test]
    fn pmf_matches_enumeration() {
        let q = [0.1, 0.5, 0.7, 0.25];
        let pmf = poisson_binomial_pmf(&q);
        let mut brute = [0.0; 5];
        for mask in 0u32..16 {
            let mut p = 1.0;
            for (i, qi) in q.iter().enumerate() {
                p *= if mask >> i & 1 == 1 { *qi } else { 1.0 - qi };
            }
            brute[mask.count_ones() as usize] += p;
        }
        for (a, b) in pmf.iter().zip(brute) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn permutation_invariant() {
        let preds = [1, 0, 0, 1, 1, 0, 1];
        let scores = [0.9, 0.2, 0.1, 0.6, 0.7, 0.4, 0.8];
        let q = Quantifier::acc(0.9, 0.1).unwrap();
        let a = estimate_from_parts(&q, &preds, Some(&scores), Some(0.9)).unwrap();
        let order = [6, 2, 4, 0, 5, 1, 3];
        let p2: Vec<u8> = order.iter().map(|&i| preds[i]).collect();
        let s2: Vec<f64> = order.iter().map(|&i| scores[i]).collect();
        let b = estimate_from_parts(&q, &p2, Some(&s2), Some(0.9)).unwrap();
        assert_eq!(a.estimate, b.estimate);
        assert!((a.lo.unwrap() - b.lo.unwrap()).abs() < 1e-15);
    }

    fn pool(n_pos: usize, n_neg: usize) -> Corpus {
        let vocab = Arc::new(Vocabulary::new(["a"]).unwrap());
        let rows = (0..n_pos + n_neg)
            .map(|i| ActivityVector::from_pairs(format!("u{i}"), [(0, 1)]).unwrap())
            .collect();
        let labels = (0..n_pos + n_neg).map(|i| (i < n_pos) as i32).collect();
        Corpus::new(vocab, rows, labels, 2).unwrap()
    }

    #[test]
    fn npp_properties() {
        let p = pool(300, 300);
        let all_pos = npp_sample(
            &p,
            &NppSpec {
                prevalence: 1.0,
                repeats: 5,
                size: 50,
                seed: 1,
            },
        )
        .unwrap();
        assert!(all_pos
            .iter()
            .all(|c| c.prevalence == 1.0 && c.indices.iter().all(|&i| i < 300)));

        let spec = NppSpec {
            prevalence: 0.5,
            repeats: 1000,
            size: 100,
            seed: 9,
        };
        let cohorts = npp_sample(&p, &spec).unwrap();
        let mean = cohorts.iter().map(|c| c.prevalence).sum::<f64>() / 1000.0;
        assert!((mean - 0.51).abs() <= 0.02, "mean {mean}");
        assert!(cohorts.iter().all(|c| {
            let mut d = c.indices.clone();
            d.dedup();
            d.len() == 100
        }));
        assert_eq!(cohorts, npp_sample(&p, &spec).unwrap());
        assert!(npp_sample(
            &pool(10, 300),
            &NppSpec {
                prevalence: 0.9,
                repeats: 3,
                size: 100,
                seed: 0
            }
        )
        .is_err());
    }

    #[test]
    fn mae_cases() {
        assert_eq!(mae(&[0.2, 0.4], &[0.2, 0.4]).unwrap(), 0.0);
        assert_eq!(mae(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert!((mae(&[0.1, 0.5, 0.9], &[0.2, 0.2, 0.8]).unwrap() - 0.5 / 3.0).abs() < 1e-15);
        assert!(mae(&[0.1], &[]).is_err());
    }
}
