use super::{fit_semisupervised, fit_supervised, EmConfig, NbConfig};
use crate::classifier::{Classifier, Learner};
use crate::data::Corpus;
use crate::error::Result;

/// Trains the Naive Bayes family: plain, log-normal, and their EM variants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NbLearner {
    pub config: NbConfig,
    /// When set, unlabeled training rows are used through EM.
    pub em: Option<EmConfig>,
}

impl NbLearner {
    pub fn plain() -> Self {
        Self {
            config: NbConfig::default(),
            em: None,
        }
    }

    pub fn log_normal() -> Self {
        Self {
            config: NbConfig {
                log_normal: true,
                ..Default::default()
            },
            em: None,
        }
    }

    pub fn semi_supervised(log_normal: bool) -> Self {
        Self {
            config: NbConfig {
                log_normal,
                ..Default::default()
            },
            em: Some(EmConfig::default()),
        }
    }
}

impl Learner for NbLearner {
    fn name(&self) -> String {
        let mut name = String::new();
        if self.em.is_some() {
            name.push_str("SS ");
        }
        name.push_str("NB");
        if self.config.log_normal {
            name.push_str(" logN");
        }
        name
    }

    fn fit(&self, train: &Corpus) -> Result<Box<dyn Classifier>> {
        let (model, _) = match &self.em {
            Some(em) if train.n_unlabeled() > 0 => fit_semisupervised(train, &self.config, em)?,
            _ => fit_supervised(&train.labeled_only(), &self.config)?,
        };
        Ok(Box::new(model))
    }
}
