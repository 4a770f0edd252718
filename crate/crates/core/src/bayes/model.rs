use serde::{Deserialize, Serialize};

use crate::calibrate::IsotonicMap;
use crate::classifier::Classifier;
use crate::data::ActivityVector;
use crate::error::{Error, Result};
use crate::stats::log_lognormal_bin;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalActivity {
    pub mu: f64,
    pub sigma: f64,
}

impl LogNormalActivity {
    /// `ln p(a)` for the integer bin `[a, a+1)`.
    pub fn log_prob(&self, a: u64) -> f64 {
        log_lognormal_bin(a as f64, self.mu, self.sigma)
    }
}

/// A fitted Naive Bayes model. `log_cond` is stored row-major, `k × d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    pub(crate) k: usize,
    pub(crate) d: usize,
    pub(crate) log_prior: Vec<f64>,
    pub(crate) log_cond: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub(crate) activity: Option<Vec<LogNormalActivity>>,
    pub(crate) alpha_prior: f64,
    pub(crate) alpha_feature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub(crate) calibrator: Option<IsotonicMap>,
}

impl NaiveBayes {
    /// Builds a model from raw parameters, checking that the distributions
    /// are normalized.
    pub fn from_parts(
        log_prior: Vec<f64>,
        log_cond: Vec<f64>,
        activity: Option<Vec<LogNormalActivity>>,
        alpha_prior: f64,
        alpha_feature: f64,
    ) -> Result<Self> {
        let k = log_prior.len();
        if k < 2 || log_cond.is_empty() || !log_cond.len().is_multiple_of(k) {
            return Err(Error::data("log_cond must be a non-empty k x d matrix"));
        }
        let d = log_cond.len() / k;
        let model = Self {
            k,
            d,
            log_prior,
            log_cond,
            activity,
            alpha_prior,
            alpha_feature,
            calibrator: None,
        };
        model.check()?;
        Ok(model)
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.k < 2
            || self.log_prior.len() != self.k
            || self.log_cond.len() != self.k * self.d
            || self.d == 0
        {
            return Err(Error::data("model dimensions are inconsistent"));
        }
        let close = |s: f64| (s - 1.0).abs() <= 1e-9;
        if !close(self.log_prior.iter().map(|l| l.exp()).sum()) {
            return Err(Error::data("class prior does not sum to one"));
        }
        for y in 0..self.k {
            if !close(self.cond_row(y).iter().map(|l| l.exp()).sum()) {
                return Err(Error::data(format!(
                    "community distribution of class {y} does not sum to one"
                )));
            }
        }
        if let Some(act) = &self.activity {
            if act.len() != self.k || act.iter().any(|a| !(a.sigma > 0.0) || !a.mu.is_finite()) {
                return Err(Error::data(
                    "activity parameters need one (mu, sigma > 0) per class",
                ));
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn log_prior(&self) -> &[f64] {
        &self.log_prior
    }

    pub fn log_cond(&self) -> &[f64] {
        &self.log_cond
    }

    pub fn cond_row(&self, y: usize) -> &[f64] {
        &self.log_cond[y * self.d..(y + 1) * self.d]
    }

    pub fn activity(&self) -> Option<&[LogNormalActivity]> {
        self.activity.as_deref()
    }

    pub fn alphas(&self) -> (f64, f64) {
        (self.alpha_prior, self.alpha_feature)
    }

    pub fn calibrator(&self) -> Option<&IsotonicMap> {
        self.calibrator.as_ref()
    }

    pub fn set_calibrator(&mut self, map: Option<IsotonicMap>) {
        self.calibrator = map;
    }

    /// `log p(x, y)` for every class, up to the multinomial coefficient.
    pub fn log_joint(&self, x: &ActivityVector) -> Result<Vec<f64>> {
        if let Some(max) = x.max_index() {
            if max >= self.d {
                return Err(Error::data(format!(
                    "index {max} outside model dimension {}",
                    self.d
                )));
            }
        }
        let a = x.total();
        if a == 0 {
            return Err(Error::data(format!("user `{}` has no activity", x.user_id)));
        }
        Ok((0..self.k)
            .map(|y| {
                let row = self.cond_row(y);
                let mut out = self.log_prior[y];
                for (j, c) in x.iter() {
                    out += c as f64 * row[j];
                }
                if let Some(act) = &self.activity {
                    out += act[y].log_prob(a);
                }
                out
            })
            .collect())
    }

    /// Posterior class probabilities without calibration.
    pub fn posterior(&self, x: &ActivityVector) -> Result<Vec<f64>> {
        let joint = self.log_joint(x)?;
        let top = joint.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = joint.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = w.iter().sum();
        Ok(w.iter().map(|v| v / total).collect())
    }

    /// Posterior probabilities; with a calibrator attached (binary models)
    /// the class-1 probability is remapped and the vector renormalized.
    pub fn predict_proba(&self, x: &ActivityVector) -> Result<Vec<f64>> {
        let mut p = self.posterior(x)?;
        if let (Some(map), 2) = (&self.calibrator, self.k) {
            let c = map.apply_one(p[1]);
            p = vec![1.0 - c, c];
        }
        Ok(p)
    }

    /// Most probable class under the uncalibrated posterior; ties go to the
    /// lowest class id.
    pub fn predict_class(&self, x: &ActivityVector) -> Result<usize> {
        let joint = self.log_joint(x)?;
        let mut best = 0;
        for y in 1..self.k {
            if joint[y] > joint[best] {
                best = y;
            }
        }
        Ok(best)
    }

    /// Per-community weight `log p(j|1) − log p(j|0)`.
    pub fn feature_log_odds(&self) -> Result<Vec<f64>> {
        if self.k != 2 {
            return Err(Error::arg(format!(
                "log-odds need a binary model, got k = {}",
                self.k
            )));
        }
        Ok(self
            .cond_row(1)
            .iter()
            .zip(self.cond_row(0))
            .map(|(a, b)| a - b)
            .collect())
    }
}

impl Classifier for NaiveBayes {
    fn score(&self, x: &ActivityVector) -> Result<f64> {
        if self.k != 2 {
            return Err(Error::arg("binary scoring needs k = 2"));
        }
        Ok(self.predict_proba(x)?[1])
    }

    fn predict(&self, x: &ActivityVector) -> Result<u8> {
        Ok(self.predict_class(x)? as u8)
    }

    fn is_calibrated(&self) -> bool {
        self.calibrator.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(d: usize) -> NaiveBayes {
        let lp = vec![0.5f64.ln(); 2];
        let lc = vec![(1.0 / d as f64).ln(); 2 * d];
        NaiveBayes::from_parts(lp, lc, None, 1.0, 1.0).unwrap()
    }

    #[test]
    fn symmetric_model_is_indifferent() {
        let m = uniform(4);
        let x = ActivityVector::from_pairs("u", [(0, 3), (2, 1)]).unwrap();
        let j = m.log_joint(&x).unwrap();
        assert_eq!(j[0], j[1]);
        assert_eq!(m.predict_proba(&x).unwrap(), vec![0.5, 0.5]);
        assert_eq!(m.predict_class(&x).unwrap(), 0);
        assert!(m.feature_log_odds().unwrap().iter().all(|&w| w == 0.0));
    }

    #[test]
    fn rejects_unnormalized_and_out_of_range() {
        assert!(NaiveBayes::from_parts(vec![0.0, 0.0], vec![0.0; 4], None, 1.0, 1.0).is_err());
        let m = uniform(2);
        let x = ActivityVector::from_pairs("u", [(5, 1)]).unwrap();
        assert!(m.log_joint(&x).is_err());
    }

    #[test]
    fn activity_term_reference_value() {
        let act = vec![
            LogNormalActivity {
                mu: 0.0,
                sigma: 1.0
            };
            2
        ];
        let lp = vec![0.5f64.ln(); 2];
        let lc = vec![0.0; 2];
        let m = NaiveBayes::from_parts(lp, lc, Some(act), 1.0, 1.0).unwrap();
        let x = ActivityVector::from_pairs("u", [(0, 1)]).unwrap();
        let j = m.log_joint(&x).unwrap();
        // log(1/2) + 1 * log(1) + log(Φ(ln 2) − Φ(0))
        assert!(((j[0] - 0.5f64.ln()).exp() - 0.2559).abs() < 1e-4);
    }

    #[test]
    fn calibrator_applies_to_class_one() {
        let mut m = uniform(2);
        m.set_calibrator(Some(
            IsotonicMap::new(vec![0.0, 1.0], vec![0.2, 0.2]).unwrap(),
        ));
        let x = ActivityVector::from_pairs("u", [(0, 1)]).unwrap();
        let p = m.predict_proba(&x).unwrap();
        assert!((p[1] - 0.2).abs() < 1e-15 && (p[0] - 0.8).abs() < 1e-15);
        assert!(m.is_calibrated());
    }
}
