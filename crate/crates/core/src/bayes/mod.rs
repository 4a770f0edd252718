//! Multinomial Naive Bayes over community counts, with an optional
//! log-normal model of total activity and semi-supervised EM training.
//!
//! For a user with counts `x` and total activity `a = Σ x_j`:
//!
//! ```text
//! log p(x, y) = log p(y) + Σ_j x_j log p(j | y) + log p(a | y)
//! p(a | y)    = Φ(a + 1; μ_y, σ_y) − Φ(a; μ_y, σ_y)      Φ = log-normal CDF
//! ```
//!
//! Parameters are estimated with additive smoothing: `α₁` on the class
//! prior, `α₂` on the per-class community distribution.

mod fit;
mod importance;
mod learner;
mod model;

use serde::{Deserialize, Serialize};

pub use fit::{fit_semisupervised, fit_supervised, objective, observed_log_likelihood, FitReport};
pub use importance::{feature_log_odds_dispersion, LogOddsStat};
pub use learner::NbLearner;
pub use model::{LogNormalActivity, NaiveBayes};

/// How per-class log-normal activity parameters are estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ActivityEstimator {
    /// Responsibility-weighted mean / population std of `ln a` per class.
    #[default]
    ClassWeighted,
    /// Mean / population std of `ln a` over all rows, shared by every class.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NbConfig {
    /// Smoothing on the class prior (α₁).
    pub alpha_prior: f64,
    /// Smoothing on per-class community probabilities (α₂).
    pub alpha_feature: f64,
    pub log_normal: bool,
    #[serde(default)]
    pub activity_estimator: ActivityEstimator,
}

impl Default for NbConfig {
    fn default() -> Self {
        Self {
            alpha_prior: 1.0,
            alpha_feature: 1.0,
            log_normal: false,
            activity_estimator: ActivityEstimator::ClassWeighted,
        }
    }
}

impl NbConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.alpha_prior > 0.0 && self.alpha_feature > 0.0) {
            return Err(crate::Error::InvalidArgument(
                "smoothing constants must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmConfig {
    pub max_iter: usize,
    /// Relative change in the objective below which EM stops.
    pub tol: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: 1e-6,
        }
    }
}

/// Floor applied to degenerate log-normal scales.
pub const SIGMA_FLOOR: f64 = 1e-6;
