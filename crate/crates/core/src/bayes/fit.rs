use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{LogNormalActivity, NaiveBayes};
use super::{ActivityEstimator, EmConfig, NbConfig, SIGMA_FLOOR};
use crate::data::{Corpus, UNLABELED};
use crate::error::{Error, Result};
use crate::stats::log_sum_exp;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Number of EM updates performed (0 for closed-form supervised fits).
    pub iterations: usize,
    /// Penalized log-likelihood after initialization and after each update.
    pub log_likelihood: Vec<f64>,
    /// The same trace without the smoothing terms.
    pub observed_log_likelihood: Vec<f64>,
    pub converged: bool,
    pub labeled: usize,
    pub unlabeled: usize,
}

/// Closed-form supervised fit. Every row must be labeled.
pub fn fit_supervised(corpus: &Corpus, cfg: &NbConfig) -> Result<(NaiveBayes, FitReport)> {
    cfg.validate()?;
    if corpus.n_unlabeled() > 0 {
        return Err(Error::arg(format!(
            "supervised fit got {} unlabeled rows",
            corpus.n_unlabeled()
        )));
    }
    let model = m_step(corpus, &one_hot(corpus), cfg)?;
    let joints = joints(&model, corpus)?;
    let raw = observed(corpus, &joints);
    let report = FitReport {
        iterations: 0,
        log_likelihood: vec![raw + penalty(&model)],
        observed_log_likelihood: vec![raw],
        converged: true,
        labeled: corpus.len(),
        unlabeled: 0,
    };
    Ok((model, report))
}

/// EM over labeled and unlabeled rows, initialized from the supervised fit
/// on the labeled rows alone. Labeled rows keep hard responsibilities.
pub fn fit_semisupervised(
    corpus: &Corpus,
    cfg: &NbConfig,
    em: &EmConfig,
) -> Result<(NaiveBayes, FitReport)> {
    cfg.validate()?;
    if em.max_iter < 1 || !(em.tol > 0.0) {
        return Err(Error::arg("EM needs max_iter >= 1 and tol > 0"));
    }
    let labeled = corpus.labeled_only();
    if let Some(c) = labeled.class_counts().iter().position(|&n| n == 0) {
        return Err(Error::data(format!(
            "EM initialization needs a labeled row of class {c}"
        )));
    }
    let mut model = m_step(&labeled, &one_hot(&labeled), cfg)?;
    let k = corpus.k();
    let mut trace: Vec<f64> = Vec::new();
    let mut raw_trace: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    loop {
        let joints = joints(&model, corpus)?;
        let raw = observed(corpus, &joints);
        let ll = raw + penalty(&model);
        if !ll.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite log-likelihood at EM iteration {iterations}"
            )));
        }
        if let Some(&prev) = trace.last() {
            if (ll - prev).abs() <= em.tol * prev.abs() {
                converged = true;
                trace.push(ll);
                raw_trace.push(raw);
                break;
            }
        }
        trace.push(ll);
        raw_trace.push(raw);
        if iterations == em.max_iter {
            break;
        }
        let mut resp = vec![0.0; corpus.len() * k];
        for (i, (joint, &label)) in joints.iter().zip(corpus.labels()).enumerate() {
            let r = &mut resp[i * k..(i + 1) * k];
            if label == UNLABELED {
                let norm = log_sum_exp(joint);
                for (ry, &jy) in r.iter_mut().zip(joint) {
                    *ry = (jy - norm).exp();
                }
            } else {
                r[label as usize] = 1.0;
            }
        }
        model = m_step(corpus, &resp, cfg)?;
        iterations += 1;
    }
    let report = FitReport {
        iterations,
        log_likelihood: trace,
        observed_log_likelihood: raw_trace,
        converged,
        labeled: labeled.len(),
        unlabeled: corpus.n_unlabeled(),
    };
    Ok((model, report))
}

/// Penalized observed-data log-likelihood of `corpus` under `model`:
/// labeled rows contribute `log p(x, y)`, unlabeled rows `log Σ_y p(x, y)`,
/// plus the smoothing terms `α₁ Σ log p(y) + α₂ Σ log p(j|y)`.
pub fn objective(model: &NaiveBayes, corpus: &Corpus) -> Result<f64> {
    let joints = joints(model, corpus)?;
    Ok(observed(corpus, &joints) + penalty(model))
}

/// [`objective`] without the smoothing terms.
pub fn observed_log_likelihood(model: &NaiveBayes, corpus: &Corpus) -> Result<f64> {
    Ok(observed(corpus, &joints(model, corpus)?))
}

fn joints(model: &NaiveBayes, corpus: &Corpus) -> Result<Vec<Vec<f64>>> {
    corpus
        .rows()
        .par_iter()
        .map(|x| model.log_joint(x))
        .collect()
}

fn observed(corpus: &Corpus, joints: &[Vec<f64>]) -> f64 {
    let mut ll = 0.0;
    for (joint, &label) in joints.iter().zip(corpus.labels()) {
        ll += if label == UNLABELED {
            log_sum_exp(joint)
        } else {
            joint[label as usize]
        };
    }
    ll
}

fn penalty(model: &NaiveBayes) -> f64 {
    model.alpha_prior * model.log_prior.iter().sum::<f64>()
        + model.alpha_feature * model.log_cond.iter().sum::<f64>()
}

fn one_hot(corpus: &Corpus) -> Vec<f64> {
    let k = corpus.k();
    let mut resp = vec![0.0; corpus.len() * k];
    for (i, &label) in corpus.labels().iter().enumerate() {
        resp[i * k + label as usize] = 1.0;
    }
    resp
}

/// Responsibility-weighted closed-form estimates. Summation runs in row
/// order so the result does not depend on thread count.
fn m_step(corpus: &Corpus, resp: &[f64], cfg: &NbConfig) -> Result<NaiveBayes> {
    let (k, d) = (corpus.k(), corpus.d());
    let mut weight = vec![0.0; k];
    let mut feat = vec![0.0; k * d];
    for (i, x) in corpus.rows().iter().enumerate() {
        for y in 0..k {
            let w = resp[i * k + y];
            weight[y] += w;
            let row = &mut feat[y * d..(y + 1) * d];
            for (j, c) in x.iter() {
                row[j] += w * c as f64;
            }
        }
    }
    if let Some(y) = weight.iter().position(|&w| w == 0.0) {
        return Err(Error::data(format!("class {y} has no rows")));
    }

    let n = corpus.len() as f64;
    let prior_norm = (cfg.alpha_prior * k as f64 + n).ln();
    let log_prior: Vec<f64> = weight
        .iter()
        .map(|&w| (cfg.alpha_prior + w).ln() - prior_norm)
        .collect();

    let mut log_cond = vec![0.0; k * d];
    for y in 0..k {
        let row = &feat[y * d..(y + 1) * d];
        let total: f64 = row.iter().sum();
        let norm = (cfg.alpha_feature * d as f64 + total).ln();
        for (out, &f) in log_cond[y * d..(y + 1) * d].iter_mut().zip(row) {
            *out = (cfg.alpha_feature + f).ln() - norm;
        }
    }

    let activity = cfg
        .log_normal
        .then(|| activity_params(corpus, resp, &weight, cfg.activity_estimator));
    Ok(NaiveBayes {
        k,
        d,
        log_prior,
        log_cond,
        activity,
        alpha_prior: cfg.alpha_prior,
        alpha_feature: cfg.alpha_feature,
        calibrator: None,
    })
}

fn activity_params(
    corpus: &Corpus,
    resp: &[f64],
    weight: &[f64],
    est: ActivityEstimator,
) -> Vec<LogNormalActivity> {
    let k = corpus.k();
    let log_a: Vec<f64> = corpus
        .rows()
        .iter()
        .map(|x| (x.total() as f64).ln())
        .collect();
    let floor = |sigma: f64, y: usize| {
        if sigma < SIGMA_FLOOR {
            log::warn!("degenerate activity spread for class {y}; sigma floored at {SIGMA_FLOOR}");
            SIGMA_FLOOR
        } else {
            sigma
        }
    };
    match est {
        ActivityEstimator::ClassWeighted => (0..k)
            .map(|y| {
                let w = |i: usize| resp[i * k + y];
                let mu = log_a
                    .iter()
                    .enumerate()
                    .map(|(i, la)| w(i) * la)
                    .sum::<f64>()
                    / weight[y];
                let var = log_a
                    .iter()
                    .enumerate()
                    .map(|(i, la)| w(i) * (la - mu).powi(2))
                    .sum::<f64>()
                    / weight[y];
                LogNormalActivity {
                    mu,
                    sigma: floor(var.sqrt(), y),
                }
            })
            .collect(),
        ActivityEstimator::Pooled => {
            let n = log_a.len() as f64;
            let mu = log_a.iter().sum::<f64>() / n;
            let var = log_a.iter().map(|la| (la - mu).powi(2)).sum::<f64>() / n;
            let sigma = floor(var.sqrt(), 0);
            vec![LogNormalActivity { mu, sigma }; k]
        }
    }
}
